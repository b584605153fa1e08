"""Run configuration: YAML/JSON schema, validation and overrides.

A RunConfig names the dataset, the episode parameters, the wrapper
stack of the action/observation spaces, and the benchmark settings.
Validation errors carry the dotted field path. `--set key=value`
overrides parse the value as YAML, so `--set env.mode=eval` and
`--set wrappers.ops=[0,34]` both work.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .bench import BenchConfig
from .env import EnvParams, RewardConfig
from .grids import GridProfile, profile_by_name
from .wrappers import expand_channels, make_adapter


class ConfigError(Exception):
    """Invalid configuration; message starts with the dotted field path."""

    def __init__(self, path: str, message: str):
        self.field_path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class DatasetSection:
    root: str = ""
    name: str = ""
    split: str = "train"
    subset: str | None = None
    parser: str = "arc_json"


@dataclass(frozen=True)
class RewardSection:
    similarity_weight: float = 1.0
    success_bonus: float = 10.0
    step_penalty: float = 0.02
    unsolved_submission_penalty: float = 1.0


@dataclass(frozen=True)
class EnvSection:
    mode: str = "train"
    max_episode_steps: int = 150
    grid_profile: str = "full"
    allowed_ops: tuple[int, ...] | None = None
    reward: RewardSection = field(default_factory=RewardSection)


@dataclass(frozen=True)
class WrapperSection:
    action: str = "point"
    flatten: bool = False
    ops: tuple[int, ...] | None = None
    answer: bool = False
    input: bool = False
    clipboard: bool = False
    contextual: bool = False
    contextual_pairs: int = 5
    auto_reset: bool = True


@dataclass(frozen=True)
class BenchSection:
    batch_sizes: tuple[int, ...] | None = None
    steps_per_env: int = 100
    repeats: int = 5
    warmup_runs: int = 1


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSection = field(default_factory=DatasetSection)
    env: EnvSection = field(default_factory=EnvSection)
    wrappers: WrapperSection = field(default_factory=WrapperSection)
    bench: BenchSection = field(default_factory=BenchSection)
    seed: int = 0

    def profile(self) -> GridProfile:
        try:
            return profile_by_name(self.env.grid_profile)
        except ValueError as e:
            raise ConfigError("env.grid_profile", str(e))

    def env_params(self) -> EnvParams:
        r = self.env.reward
        try:
            return EnvParams(
                reward=RewardConfig(
                    similarity_weight=r.similarity_weight,
                    success_bonus=r.success_bonus,
                    step_penalty=r.step_penalty,
                    unsolved_submission_penalty=r.unsolved_submission_penalty,
                ),
                mode=self.env.mode,
                max_episode_steps=self.env.max_episode_steps,
                allowed_ops=(
                    tuple(self.env.allowed_ops)
                    if self.env.allowed_ops is not None
                    else EnvParams.__dataclass_fields__["allowed_ops"].default
                ),
                profile=self.profile(),
            )
        except ValueError as e:
            raise ConfigError("env", str(e))

    def channels(self) -> tuple[str, ...]:
        w = self.wrappers
        return expand_channels(
            answer=w.answer,
            input_grid=w.input,
            clipboard=w.clipboard,
            contextual_pairs=w.contextual_pairs if w.contextual else 0,
        )

    def adapter(self):
        w = self.wrappers
        try:
            return make_adapter(w.action, self.profile(), w.ops, w.flatten)
        except ValueError as e:
            raise ConfigError("wrappers", str(e))

    def bench_config(self, seed: int | None = None, full_sweep: bool = False) -> BenchConfig:
        from .bench import DESK_SCALE_SIZES, FULL_SWEEP_SIZES

        sizes = self.bench.batch_sizes
        if sizes is None:
            sizes = FULL_SWEEP_SIZES if full_sweep else DESK_SCALE_SIZES
        try:
            return BenchConfig(
                batch_sizes=tuple(sizes),
                steps_per_env=self.bench.steps_per_env,
                repeats=self.bench.repeats,
                warmup_runs=self.bench.warmup_runs,
                seed=self.seed if seed is None else seed,
            )
        except ValueError as e:
            raise ConfigError("bench", str(e))


_SECTION_TYPES = {
    "dataset": DatasetSection,
    "env": EnvSection,
    "wrappers": WrapperSection,
    "bench": BenchSection,
}
_NESTED = {("env", "reward"): RewardSection}
_TUPLE_FIELDS = {"allowed_ops", "ops", "batch_sizes"}


def _build_section(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected a mapping, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")
    kwargs = {}
    for name, value in data.items():
        sub = _NESTED.get((path, name))
        if sub is not None:
            kwargs[name] = _build_section(sub, value, f"{path}.{name}")
        elif name in _TUPLE_FIELDS and value is not None:
            if not isinstance(value, list):
                raise ConfigError(f"{path}.{name}", "expected a list")
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(path, str(e))


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("", f"expected a mapping, got {type(data).__name__}")
    unknown = set(data) - (set(_SECTION_TYPES) | {"seed"})
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")
    kwargs = {}
    for name, cls in _SECTION_TYPES.items():
        if name in data:
            kwargs[name] = _build_section(cls, data[name], name)
    if "seed" in data:
        if not isinstance(data["seed"], int):
            raise ConfigError("seed", "expected an integer")
        kwargs["seed"] = data["seed"]
    return RunConfig(**kwargs)


def config_to_dict(config: RunConfig) -> dict:
    return dataclasses.asdict(config)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("", f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ConfigError("", f"unparseable config {path}: {e}")
    return config_from_dict(data or {})


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(config_to_dict(config), sort_keys=False))


def apply_overrides(config: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply `key.path=value` overrides; values parse as YAML."""
    data = config_to_dict(config)
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(key, "override must look like key.path=value")
        node = data
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError(key, "no such config section")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(key, "no such config field")
        node[parts[-1]] = yaml.safe_load(raw)
    return config_from_dict(_strip_tuples(data))


def _strip_tuples(obj):
    if isinstance(obj, dict):
        return {k: _strip_tuples(v) for k, v in obj.items()}
    if isinstance(obj, tuple):
        return [_strip_tuples(v) for v in obj]
    return obj
