"""Stateless episode engine: explicit state in, state out.

reset samples a task/pair and builds the initial state; step applies one
operation, computes the shaped reward and emits a timestep. Both are
pure functions over value types. The canonical implementation is
batched (structure-of-arrays over n lanes); the single-environment
functions are the n=1 case, so batched and sequential execution are
bit-identical by construction.

Reward per step combines four terms:

    r = [train] * similarity_weight * (new_sim - prev_sim)
      + [submitted and solved] * success_bonus
      - step_penalty
      - [submitted and not solved] * unsolved_submission_penalty

Similarity shaping applies in train mode only, so evaluation rewards
cannot leak the target grid. Penalty magnitudes are stored positive and
subtracted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import kernels, rng as prng
from .grids import (
    CELL_DTYPE,
    FULL,
    SENTINEL,
    GridProfile,
    PaddedGrid,
)
from .ops import Clipboard
from .tasks import TaskBuffer

TRAIN = "train"
EVAL = "eval"

DEFAULT_MAX_EPISODE_STEPS = 150
DEFAULT_CONTEXT_PAIRS = 5

BASE_CHANNELS = ("working",)


class StepKind(IntEnum):
    FIRST = 0
    MID = 1
    LAST = 2


@dataclass(frozen=True)
class RewardConfig:
    """Reward coefficients; penalties are magnitudes, subtracted."""

    similarity_weight: float = 1.0
    success_bonus: float = 10.0
    step_penalty: float = 0.02
    unsolved_submission_penalty: float = 1.0

    def __post_init__(self):
        for name in ("similarity_weight", "success_bonus", "step_penalty",
                     "unsolved_submission_penalty"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"reward.{name} must be finite")
        if self.step_penalty < 0 or self.unsolved_submission_penalty < 0:
            raise ValueError("penalties are magnitudes and must be >= 0")


@dataclass(frozen=True)
class EnvParams:
    reward: RewardConfig = field(default_factory=RewardConfig)
    mode: str = TRAIN
    max_episode_steps: int = DEFAULT_MAX_EPISODE_STEPS
    allowed_ops: tuple[int, ...] = tuple(range(kernels.NUM_OPS))
    profile: GridProfile = FULL

    def __post_init__(self):
        if self.mode not in (TRAIN, EVAL):
            raise ValueError(f"mode must be {TRAIN!r} or {EVAL!r}, got {self.mode!r}")
        if self.max_episode_steps < 1:
            raise ValueError("max_episode_steps must be >= 1")
        ops = tuple(sorted(set(self.allowed_ops)))
        if not ops:
            raise ValueError("allowed_ops must be nonempty")
        if any(o < 0 or o >= kernels.NUM_OPS for o in ops):
            raise ValueError(f"allowed_ops entries must be in 0..{kernels.NUM_OPS - 1}")
        if kernels.OP_SUBMIT not in ops:
            raise ValueError("allowed_ops must contain the submit operation (34)")
        object.__setattr__(self, "allowed_ops", ops)

    def allowed_table(self) -> np.ndarray:
        table = np.zeros(kernels.NUM_OPS, dtype=bool)
        table[list(self.allowed_ops)] = True
        return table


@dataclass(frozen=True)
class Action:
    """Core action form: an operation id plus a cell-selection mask."""

    op: int
    selection: np.ndarray  # (rows, cols) bool


@dataclass(frozen=True)
class Timestep:
    observation: np.ndarray  # (channels, rows, cols) int8, sentinel-padded
    reward: float
    step_kind: StepKind
    discount: float
    info: dict

    @property
    def last(self) -> bool:
        return self.step_kind is StepKind.LAST


@dataclass(frozen=True)
class EnvState:
    working: PaddedGrid
    input_grid: PaddedGrid
    target: PaddedGrid
    clipboard: Clipboard
    step_count: int
    last_similarity: float
    terminated: bool
    truncated: bool
    task_index: int
    pair_index: int
    rng: prng.PrngState


@dataclass
class BatchState:
    """Lane states stored structure-of-arrays: one contiguous array per field."""

    work: np.ndarray          # (n, R, C) int8
    work_h: np.ndarray        # (n,) int32
    work_w: np.ndarray
    inp: np.ndarray
    inp_h: np.ndarray
    inp_w: np.ndarray
    target: np.ndarray
    target_h: np.ndarray
    target_w: np.ndarray
    clip: np.ndarray
    clip_h: np.ndarray
    clip_w: np.ndarray
    clip_mask: np.ndarray     # (n, R, C) bool
    clip_present: np.ndarray  # (n,) bool
    step_count: np.ndarray    # (n,) int32
    last_similarity: np.ndarray  # (n,) float64
    terminated: np.ndarray    # (n,) bool
    truncated: np.ndarray
    task_index: np.ndarray    # (n,) int32
    pair_index: np.ndarray
    rng_key: np.ndarray       # (n,) uint64
    rng_counter: np.ndarray

    @property
    def size(self) -> int:
        return self.work.shape[0]

    @property
    def capacity(self) -> tuple[int, int]:
        return self.work.shape[1:]

    def lane(self, i: int) -> EnvState:
        """Materialize lane i as a scalar EnvState (copies)."""
        return EnvState(
            working=PaddedGrid(self.work[i].copy(), int(self.work_h[i]), int(self.work_w[i])),
            input_grid=PaddedGrid(self.inp[i].copy(), int(self.inp_h[i]), int(self.inp_w[i])),
            target=PaddedGrid(self.target[i].copy(), int(self.target_h[i]), int(self.target_w[i])),
            clipboard=Clipboard(
                grid=PaddedGrid(self.clip[i].copy(), int(self.clip_h[i]), int(self.clip_w[i])),
                shape_mask=self.clip_mask[i].copy(),
                present=bool(self.clip_present[i]),
            ),
            step_count=int(self.step_count[i]),
            last_similarity=float(self.last_similarity[i]),
            terminated=bool(self.terminated[i]),
            truncated=bool(self.truncated[i]),
            task_index=int(self.task_index[i]),
            pair_index=int(self.pair_index[i]),
            rng=prng.PrngState(int(self.rng_key[i]), int(self.rng_counter[i])),
        )

    @classmethod
    def from_states(cls, states: list[EnvState]) -> "BatchState":
        def stack(get):
            return np.stack([get(s) for s in states])

        def vec(get, dtype):
            return np.array([get(s) for s in states], dtype=dtype)

        return cls(
            work=stack(lambda s: s.working.cells),
            work_h=vec(lambda s: s.working.height, np.int32),
            work_w=vec(lambda s: s.working.width, np.int32),
            inp=stack(lambda s: s.input_grid.cells),
            inp_h=vec(lambda s: s.input_grid.height, np.int32),
            inp_w=vec(lambda s: s.input_grid.width, np.int32),
            target=stack(lambda s: s.target.cells),
            target_h=vec(lambda s: s.target.height, np.int32),
            target_w=vec(lambda s: s.target.width, np.int32),
            clip=stack(lambda s: s.clipboard.grid.cells),
            clip_h=vec(lambda s: s.clipboard.grid.height, np.int32),
            clip_w=vec(lambda s: s.clipboard.grid.width, np.int32),
            clip_mask=stack(lambda s: s.clipboard.shape_mask),
            clip_present=vec(lambda s: s.clipboard.present, bool),
            step_count=vec(lambda s: s.step_count, np.int32),
            last_similarity=vec(lambda s: s.last_similarity, np.float64),
            terminated=vec(lambda s: s.terminated, bool),
            truncated=vec(lambda s: s.truncated, bool),
            task_index=vec(lambda s: s.task_index, np.int32),
            pair_index=vec(lambda s: s.pair_index, np.int32),
            rng_key=vec(lambda s: s.rng.key, np.uint64),
            rng_counter=vec(lambda s: s.rng.counter, np.uint64),
        )

    def slice_lanes(self, idx) -> "BatchState":
        fields = {name: getattr(self, name)[idx] for name in _BATCH_FIELDS}
        return BatchState(**fields)

    def scatter_lanes(self, idx, other: "BatchState") -> "BatchState":
        """New BatchState with lanes idx replaced by other's lanes."""
        fields = {}
        for name in _BATCH_FIELDS:
            arr = getattr(self, name).copy()
            arr[idx] = getattr(other, name)
            fields[name] = arr
        return BatchState(**fields)


_BATCH_FIELDS = [
    "work", "work_h", "work_w", "inp", "inp_h", "inp_w",
    "target", "target_h", "target_w",
    "clip", "clip_h", "clip_w", "clip_mask", "clip_present",
    "step_count", "last_similarity", "terminated", "truncated",
    "task_index", "pair_index", "rng_key", "rng_counter",
]


@dataclass
class BatchTimestep:
    """Per-lane timestep fields as parallel arrays."""

    observation: np.ndarray   # (n, channels, R, C) int8
    reward: np.ndarray        # (n,) float64
    step_kind: np.ndarray     # (n,) int8
    discount: np.ndarray      # (n,) float64
    similarity: np.ndarray    # (n,) float64
    solved: np.ndarray        # (n,) bool
    applied: np.ndarray       # (n,) bool

    def lane(self, i: int) -> Timestep:
        return Timestep(
            observation=self.observation[i].copy(),
            reward=float(self.reward[i]),
            step_kind=StepKind(int(self.step_kind[i])),
            discount=float(self.discount[i]),
            info={
                "similarity": float(self.similarity[i]),
                "solved": bool(self.solved[i]),
                "applied": bool(self.applied[i]),
            },
        )


def compute_reward(prev_sim, new_sim, submitted, solved, params: EnvParams):
    """Four-component shaped reward; works on scalars and lane arrays."""
    rc = params.reward
    prev_sim = np.asarray(prev_sim, dtype=np.float64)
    new_sim = np.asarray(new_sim, dtype=np.float64)
    submitted = np.asarray(submitted, dtype=bool)
    solved = np.asarray(solved, dtype=bool)
    if params.mode == TRAIN:
        r = rc.similarity_weight * (new_sim - prev_sim)
    else:
        r = np.zeros_like(new_sim)
    r = r + np.where(submitted & solved, rc.success_bonus, 0.0)
    r = r - rc.step_penalty
    r = r - np.where(submitted & ~solved, rc.unsolved_submission_penalty, 0.0)
    return r


def _sentinel_plane(cells, h, w) -> np.ndarray:
    """Grid colors with out-of-region cells encoded as the sentinel."""
    rows, cols = cells.shape[1:]
    rect = kernels.rect_masks(h, w, rows, cols)
    return np.where(rect, cells, np.int8(SENTINEL)).astype(CELL_DTYPE)


def build_observation(
    state: BatchState,
    channels: tuple[str, ...],
    buffer: TaskBuffer | None,
    mode: str,
) -> np.ndarray:
    """Stack the requested channel planes in the given order.

    Channel sources: working, answer, input, clipboard, and demo{k}.in /
    demo{k}.out for contextual demonstration pairs. Demo slots beyond a
    task's pair count render as all-sentinel planes; in train mode the
    pair currently being solved is blanked the same way.
    """
    n = state.size
    rows, cols = state.capacity
    planes = []
    for name in channels:
        if name == "working":
            planes.append(_sentinel_plane(state.work, state.work_h, state.work_w))
        elif name == "answer":
            planes.append(_sentinel_plane(state.target, state.target_h, state.target_w))
        elif name == "input":
            planes.append(_sentinel_plane(state.inp, state.inp_h, state.inp_w))
        elif name == "clipboard":
            plane = _sentinel_plane(state.clip, state.clip_h, state.clip_w)
            plane = np.where(state.clip_present[:, None, None], plane, np.int8(SENTINEL))
            planes.append(plane.astype(CELL_DTYPE))
        elif name.startswith("demo"):
            if buffer is None:
                raise ValueError(f"channel {name!r} requires a task buffer")
            k, side = _parse_demo_channel(name)
            if k >= buffer.demo_capacity:
                planes.append(np.full((n, rows, cols), SENTINEL, dtype=CELL_DTYPE))
                continue
            if side == "in":
                cells = buffer.demo_in_cells[state.task_index, k]
                h = buffer.demo_in_h[state.task_index, k]
                w = buffer.demo_in_w[state.task_index, k]
            else:
                cells = buffer.demo_out_cells[state.task_index, k]
                h = buffer.demo_out_h[state.task_index, k]
                w = buffer.demo_out_w[state.task_index, k]
            plane = _sentinel_plane(cells, h, w)
            hidden = k >= buffer.demo_count[state.task_index]
            if mode == TRAIN:
                hidden = hidden | (state.pair_index == k)
            plane = np.where(hidden[:, None, None], np.int8(SENTINEL), plane)
            planes.append(plane.astype(CELL_DTYPE))
        else:
            raise ValueError(f"unknown observation channel {name!r}")
    return np.stack(planes, axis=1)


def _parse_demo_channel(name: str) -> tuple[int, str]:
    # "demo{k}.in" / "demo{k}.out", k zero-based
    stem, _, side = name.partition(".")
    if side not in ("in", "out") or not stem[4:].isdigit():
        raise ValueError(f"unknown observation channel {name!r}")
    return int(stem[4:]), side


def reset_batch(
    keys: np.ndarray,
    counters: np.ndarray,
    params: EnvParams,
    buffer: TaskBuffer,
    channels: tuple[str, ...] = BASE_CHANNELS,
) -> tuple[BatchState, BatchTimestep]:
    """Reset one lane per PRNG stream; lanes are mutually independent.

    Draw order per lane: one draw for the task index, then in train mode
    one draw for the demonstration pair (eval episodes use test pair 0).
    """
    if buffer.num_tasks < 1:
        raise ValueError("task buffer is empty")
    n = keys.shape[0]
    words, counters = prng.next_u64_vec(keys, counters)
    task_idx = prng.uniform_index_vec(words, buffer.num_tasks).astype(np.int32)
    if params.mode == TRAIN:
        words, counters = prng.next_u64_vec(keys, counters)
        pair_idx = prng.uniform_index_vec(
            words, buffer.demo_count[task_idx].astype(np.uint64)
        ).astype(np.int32)
        inp = buffer.demo_in_cells[task_idx, pair_idx]
        inp_h = buffer.demo_in_h[task_idx, pair_idx]
        inp_w = buffer.demo_in_w[task_idx, pair_idx]
        target = buffer.demo_out_cells[task_idx, pair_idx]
        target_h = buffer.demo_out_h[task_idx, pair_idx]
        target_w = buffer.demo_out_w[task_idx, pair_idx]
    else:
        pair_idx = np.zeros(n, dtype=np.int32)
        inp = buffer.test_in_cells[task_idx, pair_idx]
        inp_h = buffer.test_in_h[task_idx, pair_idx]
        inp_w = buffer.test_in_w[task_idx, pair_idx]
        target = buffer.test_out_cells[task_idx, pair_idx]
        target_h = buffer.test_out_h[task_idx, pair_idx]
        target_w = buffer.test_out_w[task_idx, pair_idx]

    rows, cols = inp.shape[1:]
    sim = kernels.similarity_many(inp, inp_h, inp_w, target, target_h, target_w)
    state = BatchState(
        work=inp.copy(),
        work_h=inp_h.copy(),
        work_w=inp_w.copy(),
        inp=inp.copy(),
        inp_h=inp_h.copy(),
        inp_w=inp_w.copy(),
        target=target.copy(),
        target_h=target_h.copy(),
        target_w=target_w.copy(),
        clip=np.zeros((n, rows, cols), dtype=CELL_DTYPE),
        clip_h=np.ones(n, dtype=np.int32),
        clip_w=np.ones(n, dtype=np.int32),
        clip_mask=np.zeros((n, rows, cols), dtype=bool),
        clip_present=np.zeros(n, dtype=bool),
        step_count=np.zeros(n, dtype=np.int32),
        last_similarity=sim,
        terminated=np.zeros(n, dtype=bool),
        truncated=np.zeros(n, dtype=bool),
        task_index=task_idx,
        pair_index=pair_idx,
        rng_key=keys.copy(),
        rng_counter=counters,
    )
    ts = BatchTimestep(
        observation=build_observation(state, channels, buffer, params.mode),
        reward=np.zeros(n, dtype=np.float64),
        step_kind=np.full(n, StepKind.FIRST, dtype=np.int8),
        discount=np.ones(n, dtype=np.float64),
        similarity=sim.copy(),
        solved=np.zeros(n, dtype=bool),
        applied=np.ones(n, dtype=bool),
    )
    return state, ts


def step_batch(
    state: BatchState,
    ops: np.ndarray,
    selections: np.ndarray,
    params: EnvParams,
    buffer: TaskBuffer | None = None,
    channels: tuple[str, ...] = BASE_CHANNELS,
) -> tuple[BatchState, BatchTimestep]:
    """Advance every lane by one action.

    Lanes already terminal pass through unchanged with zero reward and a
    last step-kind (lenient, for unconditional batched stepping). Lanes
    whose op is outside allowed_ops advance the step counter only and
    pay the step penalty.
    """
    ops = np.asarray(ops, dtype=np.int32)
    active = ~(state.terminated | state.truncated)
    allowed = params.allowed_table()[ops]

    (work, work_h, work_w, clip, clip_h, clip_w, clip_mask, clip_present,
     submitted, applied) = kernels.apply_ops(
        ops, selections,
        state.work, state.work_h, state.work_w,
        state.inp, state.inp_h, state.inp_w,
        state.clip, state.clip_h, state.clip_w,
        state.clip_mask, state.clip_present,
        active=active & allowed,
    )

    step_count = np.where(active, state.step_count + 1, state.step_count).astype(np.int32)
    sim = kernels.similarity_many(
        work, work_h, work_w, state.target, state.target_h, state.target_w
    )
    sim = np.where(active, sim, state.last_similarity)
    terminated = state.terminated | submitted
    truncated = state.truncated | (
        active & ~submitted & (step_count >= params.max_episode_steps)
    )
    solved = submitted & (sim == 1.0)
    reward = np.where(
        active,
        compute_reward(state.last_similarity, sim, submitted, solved, params),
        0.0,
    )
    last = terminated | truncated

    new_state = BatchState(
        work=work, work_h=work_h, work_w=work_w,
        inp=state.inp.copy(), inp_h=state.inp_h.copy(), inp_w=state.inp_w.copy(),
        target=state.target.copy(), target_h=state.target_h.copy(),
        target_w=state.target_w.copy(),
        clip=clip, clip_h=clip_h, clip_w=clip_w,
        clip_mask=clip_mask, clip_present=clip_present,
        step_count=step_count,
        last_similarity=sim,
        terminated=terminated,
        truncated=truncated,
        task_index=state.task_index.copy(),
        pair_index=state.pair_index.copy(),
        rng_key=state.rng_key.copy(),
        rng_counter=state.rng_counter.copy(),
    )
    ts = BatchTimestep(
        observation=build_observation(new_state, channels, buffer, params.mode),
        reward=reward,
        step_kind=np.where(last, np.int8(StepKind.LAST), np.int8(StepKind.MID)),
        discount=np.where(terminated, 0.0, 1.0),
        similarity=sim.copy(),
        solved=solved,
        applied=applied,
    )
    return new_state, ts


def reset(
    rng: prng.PrngState,
    params: EnvParams,
    buffer: TaskBuffer,
    channels: tuple[str, ...] = BASE_CHANNELS,
) -> tuple[EnvState, Timestep]:
    """Single-environment reset: the n=1 lane of reset_batch."""
    keys = np.array([rng.key], dtype=np.uint64)
    counters = np.array([rng.counter], dtype=np.uint64)
    bstate, bts = reset_batch(keys, counters, params, buffer, channels)
    return bstate.lane(0), bts.lane(0)


def step(
    state: EnvState,
    action: Action,
    params: EnvParams,
    buffer: TaskBuffer | None = None,
    channels: tuple[str, ...] = BASE_CHANNELS,
) -> tuple[EnvState, Timestep]:
    """Single-environment step: the n=1 lane of step_batch."""
    bstate = BatchState.from_states([state])
    ops = np.array([action.op], dtype=np.int32)
    sels = action.selection[None, :, :]
    new_bstate, bts = step_batch(bstate, ops, sels, params, buffer, channels)
    return new_bstate.lane(0), bts.lane(0)


def base_observation(state: EnvState) -> np.ndarray:
    """One plane: working grid colors, sentinel outside the logical region."""
    bstate = BatchState.from_states([state])
    return build_observation(bstate, BASE_CHANNELS, None, TRAIN)[0]
