"""Dataset parsing, the task registry and the pre-stacked task buffer.

Tasks are ARC-format JSON files: {"train": [{"input": [[...]], "output":
[[...]]}, ...], "test": [...]}, task id = filename stem. A dataset
directory is loaded in lexicographic id order (deterministic regardless
of filesystem enumeration), optionally filtered by a named subset file
(a YAML/JSON list of ids stored beside the dataset).

build_task_buffer pads every grid into fixed-capacity buffers and
stacks the whole dataset into (tasks, pairs, rows, cols) arrays so
in-episode sampling is constant-time array indexing.
"""

from __future__ import annotations

import hashlib
import json
import shutil
import urllib.request
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import yaml

from . import rng as prng
from .grids import CELL_DTYPE, FULL, MINI, GridProfile, pad_into_buffer

DEFAULT_MAX_DEMO_PAIRS = 5
DEFAULT_MAX_TEST_PAIRS = 2

_SPLIT_DIRS = {"train": "training", "evaluation": "evaluation"}


class DatasetError(Exception):
    """Malformed dataset input; carries the offending path when known."""

    def __init__(self, message: str, path: Path | str | None = None):
        self.path = Path(path) if path is not None else None
        super().__init__(f"{path}: {message}" if path is not None else message)


class FetchError(Exception):
    pass


@dataclass(frozen=True)
class RawTask:
    id: str
    demo_pairs: tuple[tuple[np.ndarray, np.ndarray], ...]
    test_pairs: tuple[tuple[np.ndarray, np.ndarray], ...]


@dataclass(frozen=True)
class DatasetSpec:
    root: Path
    name: str = ""
    split: str = "train"
    subset: str | None = None
    parser: str = "arc_json"

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))
        if self.split not in _SPLIT_DIRS:
            raise ValueError(f"split must be one of {sorted(_SPLIT_DIRS)}")
        if self.parser not in PARSERS:
            raise ValueError(f"unknown parser {self.parser!r}; registered: {sorted(PARSERS)}")


def _parse_matrix(obj, what: str, profile: GridProfile, path=None) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise DatasetError(f"{what} is not a non-empty array of arrays", path)
    width = len(obj[0])
    if width == 0 or any(len(r) != width for r in obj):
        raise DatasetError(f"{what} has ragged rows", path)
    for row in obj:
        for v in row:
            if not isinstance(v, int) or isinstance(v, bool) or not (0 <= v <= 9):
                raise DatasetError(f"{what} holds a color outside 0..9: {v!r}", path)
    h, w = len(obj), width
    if h > profile.rows or w > profile.cols:
        raise DatasetError(
            f"{what} is {h}x{w}, exceeding the {profile.rows}x{profile.cols} capacity", path
        )
    return np.array(obj, dtype=CELL_DTYPE)


def parse_task_json(
    text: str | bytes, task_id: str, profile: GridProfile = FULL, path=None
) -> RawTask:
    """Parse one ARC-format task file."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise DatasetError(f"malformed JSON: {e}", path) from e
    if not isinstance(data, dict) or "train" not in data or "test" not in data:
        raise DatasetError('top level must be an object with "train" and "test" keys', path)

    def pairs(key):
        entries = data[key]
        if not isinstance(entries, list) or not entries:
            raise DatasetError(f'"{key}" must be a non-empty array of pairs', path)
        out = []
        for i, entry in enumerate(entries):
            if not isinstance(entry, dict) or "input" not in entry or "output" not in entry:
                raise DatasetError(f'{key}[{i}] must have "input" and "output"', path)
            out.append((
                _parse_matrix(entry["input"], f"{key}[{i}].input", profile, path),
                _parse_matrix(entry["output"], f"{key}[{i}].output", profile, path),
            ))
        return tuple(out)

    return RawTask(id=task_id, demo_pairs=pairs("train"), test_pairs=pairs("test"))


PARSERS = {"arc_json": parse_task_json}


def register_parser(name: str, fn) -> None:
    """Extension point for custom dataset formats.

    A parser maps (text, task_id, profile, path) to a RawTask.
    """
    PARSERS[name] = fn


def serialize_task(task: RawTask) -> str:
    """RawTask back to ARC JSON text (fixture writer; parse round-trips)."""
    doc = {
        key: [
            {"input": a.tolist(), "output": b.tolist()}
            for a, b in getattr(task, f"{src}_pairs")
        ]
        for key, src in (("train", "demo"), ("test", "test"))
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def write_dataset(tasks, directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for t in tasks:
        (directory / f"{t.id}.json").write_text(serialize_task(t))


class LazyTask:
    """Task whose grids parse on first access; id known from the filename."""

    def __init__(self, path: Path, profile: GridProfile, parser=parse_task_json):
        self.path = Path(path)
        self.id = self.path.stem
        self._profile = profile
        self._parser = parser

    @cached_property
    def _task(self) -> RawTask:
        return self._parser(self.path.read_text(), self.id, self._profile, path=self.path)

    @property
    def demo_pairs(self):
        return self._task.demo_pairs

    @property
    def test_pairs(self):
        return self._task.test_pairs


def _resolve_subset(spec: DatasetSpec, task_dir: Path) -> list[str] | None:
    if spec.subset is None:
        return None
    candidates = [Path(spec.subset)]
    for base in (spec.root / "subsets", task_dir / "subsets", spec.root):
        for ext in (".yaml", ".yml", ".json"):
            candidates.append(base / f"{spec.subset}{ext}")
    for cand in candidates:
        if cand.is_file():
            ids = yaml.safe_load(cand.read_text())
            if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
                raise DatasetError("subset file must be a list of task-id strings", cand)
            return ids
    raise DatasetError(f"subset {spec.subset!r} not found near {spec.root}")


def load_dataset(
    spec: DatasetSpec, profile: GridProfile = FULL, lazy: bool = False
) -> list:
    """Load a dataset directory into tasks sorted by id.

    With lazy=True, file stems are enumerated eagerly but grid bodies
    parse on demand; eager and lazy loads build identical buffers.
    """
    task_dir = spec.root / _SPLIT_DIRS[spec.split]
    if not task_dir.is_dir():
        task_dir = spec.root
    if not task_dir.is_dir():
        raise DatasetError("dataset directory does not exist", spec.root)
    files = sorted(task_dir.glob("*.json"), key=lambda p: p.stem)
    subset = _resolve_subset(spec, task_dir)
    if subset is not None:
        by_id = {p.stem: p for p in files}
        missing = [i for i in subset if i not in by_id]
        if missing:
            raise DatasetError(f"subset ids not present in dataset: {missing}", spec.root)
        files = [by_id[i] for i in sorted(subset)]
    if not files:
        raise DatasetError("no task files found", task_dir)
    parser = PARSERS[spec.parser]
    if lazy:
        return [LazyTask(p, profile, parser) for p in files]
    return [parser(p.read_text(), p.stem, profile, path=p) for p in files]


@dataclass
class TaskBuffer:
    """Every task pre-padded and stacked into fixed-shape arrays.

    Grid arrays are (tasks, pair_capacity, rows, cols); slots beyond a
    task's pair count hold the canonical empty grid (1x1, color 0).
    """

    demo_in_cells: np.ndarray
    demo_in_h: np.ndarray
    demo_in_w: np.ndarray
    demo_out_cells: np.ndarray
    demo_out_h: np.ndarray
    demo_out_w: np.ndarray
    demo_count: np.ndarray
    test_in_cells: np.ndarray
    test_in_h: np.ndarray
    test_in_w: np.ndarray
    test_out_cells: np.ndarray
    test_out_h: np.ndarray
    test_out_w: np.ndarray
    test_count: np.ndarray
    task_ids: tuple[str, ...]
    profile: GridProfile

    @property
    def num_tasks(self) -> int:
        return len(self.task_ids)

    @property
    def demo_capacity(self) -> int:
        return self.demo_in_cells.shape[1]

    def task_index(self, task_id: str) -> int:
        try:
            return self.task_ids.index(task_id)
        except ValueError:
            raise KeyError(f"task id {task_id!r} not in buffer")


def build_task_buffer(
    tasks,
    profile: GridProfile = FULL,
    max_demo_pairs: int = DEFAULT_MAX_DEMO_PAIRS,
    max_test_pairs: int = DEFAULT_MAX_TEST_PAIRS,
) -> TaskBuffer:
    """Stack tasks (in input order) into a TaskBuffer.

    Tasks with more pairs than the configured caps fail loudly; silent
    truncation would corrupt experiments.
    """
    tasks = list(tasks)
    if not tasks:
        raise ValueError("cannot build a buffer from zero tasks")
    t_count = len(tasks)
    rows, cols = profile.shape

    def alloc(pair_cap):
        return (
            np.zeros((t_count, pair_cap, rows, cols), dtype=CELL_DTYPE),
            np.ones((t_count, pair_cap), dtype=np.int32),
            np.ones((t_count, pair_cap), dtype=np.int32),
        )

    demo_in, demo_in_h, demo_in_w = alloc(max_demo_pairs)
    demo_out, demo_out_h, demo_out_w = alloc(max_demo_pairs)
    test_in, test_in_h, test_in_w = alloc(max_test_pairs)
    test_out, test_out_h, test_out_w = alloc(max_test_pairs)
    demo_count = np.zeros(t_count, dtype=np.int32)
    test_count = np.zeros(t_count, dtype=np.int32)

    for t, task in enumerate(tasks):
        demos, tests = task.demo_pairs, task.test_pairs
        if not (1 <= len(demos) <= max_demo_pairs):
            raise DatasetError(
                f"task {task.id!r} has {len(demos)} demo pairs; cap is {max_demo_pairs}"
            )
        if not (1 <= len(tests) <= max_test_pairs):
            raise DatasetError(
                f"task {task.id!r} has {len(tests)} test pairs; cap is {max_test_pairs}"
            )
        demo_count[t] = len(demos)
        test_count[t] = len(tests)
        for p, (a, b) in enumerate(demos):
            ga = pad_into_buffer(a, profile)
            gb = pad_into_buffer(b, profile)
            demo_in[t, p], demo_in_h[t, p], demo_in_w[t, p] = ga.cells, ga.height, ga.width
            demo_out[t, p], demo_out_h[t, p], demo_out_w[t, p] = gb.cells, gb.height, gb.width
        for p, (a, b) in enumerate(tests):
            ga = pad_into_buffer(a, profile)
            gb = pad_into_buffer(b, profile)
            test_in[t, p], test_in_h[t, p], test_in_w[t, p] = ga.cells, ga.height, ga.width
            test_out[t, p], test_out_h[t, p], test_out_w[t, p] = gb.cells, gb.height, gb.width

    return TaskBuffer(
        demo_in_cells=demo_in, demo_in_h=demo_in_h, demo_in_w=demo_in_w,
        demo_out_cells=demo_out, demo_out_h=demo_out_h, demo_out_w=demo_out_w,
        demo_count=demo_count,
        test_in_cells=test_in, test_in_h=test_in_h, test_in_w=test_in_w,
        test_out_cells=test_out, test_out_h=test_out_h, test_out_w=test_out_w,
        test_count=test_count,
        task_ids=tuple(t.id for t in tasks),
        profile=profile,
    )


def sample_task(rng: prng.PrngState, buffer: TaskBuffer) -> tuple[int, prng.PrngState]:
    """Uniform task index from one PRNG draw (multiply-shift reduction)."""
    word, rng = prng.next_u64(rng)
    return prng.uniform_index(word, buffer.num_tasks), rng


def generate_synthetic_tasks(
    count: int = 149, profile: GridProfile = MINI, seed: int = 0
) -> list[RawTask]:
    """Deterministic synthetic dataset shaped like a small-grid corpus.

    Each task pairs a random grid with its horizontal mirror, 2-4 demo
    pairs and 1-2 test pairs, ids synth_000..; useful for offline demos,
    benchmarks and fixtures.
    """
    s = prng.from_seed(seed)
    tasks = []
    for i in range(count):
        def draw(n):
            nonlocal s
            word, s = prng.next_u64(s)
            return prng.uniform_index(word, n)

        def make_pair():
            h = 1 + draw(profile.rows)
            w = 1 + draw(profile.cols)
            cells = np.empty((h, w), dtype=CELL_DTYPE)
            for r in range(h):
                for c in range(w):
                    cells[r, c] = draw(10)
            return cells, cells[:, ::-1].copy()

        demo_pairs = tuple(make_pair() for _ in range(2 + draw(3)))
        test_pairs = tuple(make_pair() for _ in range(1 + draw(2)))
        tasks.append(RawTask(id=f"synth_{i:03d}", demo_pairs=demo_pairs, test_pairs=test_pairs))
    return tasks


DEFAULT_URL_TABLE = Path(__file__).parent / "datasets.yaml"


def fetch_dataset(name: str, destination: Path, table: Path | None = None) -> Path:
    """Download and unpack a named dataset archive; idempotent.

    The URL table maps name -> {url, sha256}; the archive digest is
    verified before unpacking. Already-present datasets are returned
    without touching the network.
    """
    destination = Path(destination)
    target = destination / name
    if target.is_dir() and any(target.iterdir()):
        return target
    table_path = Path(table) if table is not None else DEFAULT_URL_TABLE
    entries = yaml.safe_load(table_path.read_text()) or {}
    if name not in entries:
        raise FetchError(f"unknown dataset name {name!r}; table {table_path} has {sorted(entries)}")
    url = entries[name]["url"]
    digest = entries[name]["sha256"]
    destination.mkdir(parents=True, exist_ok=True)
    archive = destination / f"{name}.archive"
    try:
        with urllib.request.urlopen(url) as resp:
            archive.write_bytes(resp.read())
    except OSError as e:
        raise FetchError(f"download failed for {url}: {e}") from e
    actual = hashlib.sha256(archive.read_bytes()).hexdigest()
    if actual != digest:
        archive.unlink()
        raise FetchError(f"digest mismatch for {name}: expected {digest}, got {actual}")
    shutil.unpack_archive(archive, target, format="zip")
    archive.unlink()
    return target
