"""Composable action and observation transformations.

Action adapters map point / bounding-box / flattened parameterizations
onto the core (op id, selection mask) form before execution, so
downstream logic never branches on the parameterization. Observation
channels concatenate in a frozen order (working, answer, input,
clipboard, demo pairs) regardless of how a configuration enables them.
All transformations are pure; wrappers hold configuration only.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from . import env as envcore
from . import kernels
from . import rng as prng
from .env import Action, BatchState, BatchTimestep, EnvParams, EnvState, StepKind, Timestep
from .grids import GridProfile
from .tasks import TaskBuffer

CHANNEL_ORDER = ("working", "answer", "input", "clipboard")


@dataclass(frozen=True)
class PointAction:
    row: int
    col: int
    op: int


@dataclass(frozen=True)
class BBoxAction:
    r1: int
    c1: int
    r2: int
    c2: int
    op: int


def point_to_mask(a: PointAction, profile: GridProfile) -> Action:
    """Selection mask with exactly the (row, col) bit set."""
    if not (0 <= a.row < profile.rows and 0 <= a.col < profile.cols):
        raise ValueError(f"point ({a.row},{a.col}) outside {profile.rows}x{profile.cols}")
    sel = np.zeros(profile.shape, dtype=bool)
    sel[a.row, a.col] = True
    return Action(op=a.op, selection=sel)


def bbox_to_mask(a: BBoxAction, profile: GridProfile) -> Action:
    """Filled-rectangle mask; corner order is normalized per axis."""
    for v, cap in ((a.r1, profile.rows), (a.r2, profile.rows),
                   (a.c1, profile.cols), (a.c2, profile.cols)):
        if not (0 <= v < cap):
            raise ValueError(f"bbox corner {v} outside capacity")
    r_lo, r_hi = min(a.r1, a.r2), max(a.r1, a.r2)
    c_lo, c_hi = min(a.c1, a.c2), max(a.c1, a.c2)
    sel = np.zeros(profile.shape, dtype=bool)
    sel[r_lo:r_hi + 1, c_lo:c_hi + 1] = True
    return Action(op=a.op, selection=sel)


def flatten_action_space(dims: list[int]):
    """Row-major mixed-radix bijection over a composite discrete space.

    Returns (encode, decode) with decode(encode(x)) == x for every tuple
    x within dims.
    """
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError("every dimension must be >= 1")

    def encode(tpl):
        if len(tpl) != len(dims):
            raise ValueError(f"expected {len(dims)} coordinates")
        flat = 0
        for v, d in zip(tpl, dims):
            if not (0 <= v < d):
                raise ValueError(f"coordinate {v} outside 0..{d - 1}")
            flat = flat * d + v
        return flat

    def decode(flat):
        if not (0 <= flat < prod(dims)):
            raise ValueError(f"flat index {flat} outside space of size {prod(dims)}")
        out = []
        for d in reversed(dims):
            out.append(flat % d)
            flat //= d
        return tuple(reversed(out))

    return encode, decode


@dataclass(frozen=True)
class RestrictedOps:
    """Dense index <-> op id mapping; disallowed ops are unrepresentable."""

    ops: tuple[int, ...]

    def __post_init__(self):
        if not self.ops:
            raise ValueError("op subset must be nonempty")
        if len(set(self.ops)) != len(self.ops):
            raise ValueError("op subset has duplicates")
        if any(o < 0 or o >= kernels.NUM_OPS for o in self.ops):
            raise ValueError(f"op ids must be in 0..{kernels.NUM_OPS - 1}")
        if kernels.OP_SUBMIT not in self.ops:
            raise ValueError("op subset must contain a terminator (submit, 34)")

    @property
    def size(self) -> int:
        return len(self.ops)

    def to_op(self, index: int) -> int:
        if not (0 <= index < len(self.ops)):
            raise ValueError(f"op index {index} outside 0..{len(self.ops) - 1}")
        return self.ops[index]

    def table(self) -> np.ndarray:
        return np.asarray(self.ops, dtype=np.int32)


def restrict_ops(allowed) -> RestrictedOps:
    return RestrictedOps(ops=tuple(int(o) for o in allowed))


ALL_OPS = restrict_ops(tuple(range(kernels.NUM_OPS)))


@dataclass(frozen=True)
class ObsSpec:
    """Ordered channel list; see expand_channels for the frozen order."""

    channels: tuple[str, ...] = ("working",)

    def __post_init__(self):
        if not self.channels or self.channels[0] != "working":
            raise ValueError("observation must start with the working-grid channel")


def expand_channels(
    answer: bool = False,
    input_grid: bool = False,
    clipboard: bool = False,
    contextual_pairs: int = 0,
) -> tuple[str, ...]:
    """Channel list in the frozen order for a wrapper configuration.

    Each contextual pair contributes two channels (input then output),
    so the classic configurations come out as 1, 2, 2, 11, 3, 12 and 13
    channels.
    """
    channels = ["working"]
    if answer:
        channels.append("answer")
    if input_grid:
        channels.append("input")
    if clipboard:
        channels.append("clipboard")
    for k in range(contextual_pairs):
        channels.append(f"demo{k}.in")
        channels.append(f"demo{k}.out")
    return tuple(channels)


def augment_observation(
    state: EnvState, spec: ObsSpec, buffer: TaskBuffer | None, mode: str
) -> np.ndarray:
    """Channel stack for one state (scalar view of the batched builder)."""
    bstate = BatchState.from_states([state])
    return envcore.build_observation(bstate, spec.channels, buffer, mode)[0]


# Action adapters. Composite actions use dense op indices (identity when
# no subset is configured); adapters convert to core (ops, masks) form,
# sample uniformly, and describe actions for trajectory records.


def _check_coords(arr: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    bounds = np.asarray(dims, dtype=np.int64)
    if arr.size and ((arr < 0).any() or (arr >= bounds).any()):
        raise ValueError(f"action coordinates outside the space dims {dims}")
    return arr


class MaskActions:
    """Core parameterization: (op index, boolean selection mask)."""

    kind = "mask"

    def __init__(self, profile: GridProfile, ops: RestrictedOps = ALL_OPS):
        self.profile = profile
        self.ops = ops

    def space(self) -> dict:
        return {
            "kind": self.kind,
            "rows": self.profile.rows,
            "cols": self.profile.cols,
            "num_ops": self.ops.size,
            "op_ids": list(self.ops.ops),
        }

    def to_core_batch(self, actions) -> tuple[np.ndarray, np.ndarray]:
        op_idx, sel = actions
        op_idx = np.asarray(op_idx, dtype=np.int64)
        if op_idx.size and (op_idx.min() < 0 or op_idx.max() >= self.ops.size):
            raise ValueError(f"op index outside 0..{self.ops.size - 1}")
        return self.ops.table()[op_idx], np.asarray(sel, dtype=bool)

    def to_core(self, action) -> Action:
        op_idx, sel = action
        return Action(op=self.ops.to_op(int(op_idx)), selection=np.asarray(sel, dtype=bool))

    def sample_batch(self, keys, counters):
        rows, cols = self.profile.shape
        n = keys.shape[0]
        words, counters = prng.next_u64_vec(keys, counters)
        op_idx = prng.uniform_index_vec(words, self.ops.size).astype(np.int64)
        bits = np.zeros((n, rows * cols), dtype=bool)
        for block in range(0, rows * cols, 64):
            words, counters = prng.next_u64_vec(keys, counters)
            width = min(64, rows * cols - block)
            shifts = np.arange(width, dtype=np.uint64)
            bits[:, block:block + width] = (words[:, None] >> shifts[None, :]) & np.uint64(1)
        return (op_idx, bits.reshape(n, rows, cols)), counters

    def describe(self, actions) -> list[dict]:
        ops, sel = self.to_core_batch(actions)
        out = []
        for i in range(ops.shape[0]):
            nz = np.argwhere(sel[i])
            box = (
                [int(nz[:, 0].min()), int(nz[:, 1].min()),
                 int(nz[:, 0].max()), int(nz[:, 1].max())]
                if nz.size else []
            )
            out.append({"op": int(ops[i]), "selection": box})
        return out


class PointActions:
    """(row, col, op index) triples; the smallest composite space."""

    kind = "point"

    def __init__(self, profile: GridProfile, ops: RestrictedOps = ALL_OPS):
        self.profile = profile
        self.ops = ops

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.profile.rows, self.profile.cols, self.ops.size)

    def space(self) -> dict:
        return {
            "kind": self.kind,
            "rows": self.profile.rows,
            "cols": self.profile.cols,
            "num_ops": self.ops.size,
            "op_ids": list(self.ops.ops),
            "dims": list(self.dims),
        }

    def to_core_batch(self, actions) -> tuple[np.ndarray, np.ndarray]:
        arr = _check_coords(np.asarray(actions, dtype=np.int64), self.dims)
        n = arr.shape[0]
        rows, cols = self.profile.shape
        sel = np.zeros((n, rows, cols), dtype=bool)
        sel[np.arange(n), arr[:, 0], arr[:, 1]] = True
        return self.ops.table()[arr[:, 2]], sel

    def to_core(self, action) -> Action:
        r, c, op_idx = (int(v) for v in action)
        return point_to_mask(PointAction(r, c, self.ops.to_op(op_idx)), self.profile)

    def sample_batch(self, keys, counters):
        coords = []
        for dim in self.dims:
            words, counters = prng.next_u64_vec(keys, counters)
            coords.append(prng.uniform_index_vec(words, dim).astype(np.int64))
        return np.stack(coords, axis=1), counters

    def describe(self, actions) -> list[dict]:
        arr = np.asarray(actions, dtype=np.int64)
        return [
            {"op": self.ops.to_op(int(a[2])), "selection": [int(a[0]), int(a[1])]}
            for a in arr
        ]


class BBoxActions:
    """(r1, c1, r2, c2, op index) tuples; corners normalized per axis."""

    kind = "bbox"

    def __init__(self, profile: GridProfile, ops: RestrictedOps = ALL_OPS):
        self.profile = profile
        self.ops = ops

    @property
    def dims(self) -> tuple[int, ...]:
        rows, cols = self.profile.shape
        return (rows, cols, rows, cols, self.ops.size)

    def space(self) -> dict:
        return {
            "kind": self.kind,
            "rows": self.profile.rows,
            "cols": self.profile.cols,
            "num_ops": self.ops.size,
            "op_ids": list(self.ops.ops),
            "dims": list(self.dims),
        }

    def to_core_batch(self, actions) -> tuple[np.ndarray, np.ndarray]:
        arr = _check_coords(np.asarray(actions, dtype=np.int64), self.dims)
        rows, cols = self.profile.shape
        r_lo = np.minimum(arr[:, 0], arr[:, 2])[:, None, None]
        r_hi = np.maximum(arr[:, 0], arr[:, 2])[:, None, None]
        c_lo = np.minimum(arr[:, 1], arr[:, 3])[:, None, None]
        c_hi = np.maximum(arr[:, 1], arr[:, 3])[:, None, None]
        rr = np.arange(rows, dtype=np.int64)[None, :, None]
        cc = np.arange(cols, dtype=np.int64)[None, None, :]
        sel = (rr >= r_lo) & (rr <= r_hi) & (cc >= c_lo) & (cc <= c_hi)
        return self.ops.table()[arr[:, 4]], sel

    def to_core(self, action) -> Action:
        r1, c1, r2, c2, op_idx = (int(v) for v in action)
        return bbox_to_mask(BBoxAction(r1, c1, r2, c2, self.ops.to_op(op_idx)), self.profile)

    def sample_batch(self, keys, counters):
        coords = []
        for dim in self.dims:
            words, counters = prng.next_u64_vec(keys, counters)
            coords.append(prng.uniform_index_vec(words, dim).astype(np.int64))
        return np.stack(coords, axis=1), counters

    def describe(self, actions) -> list[dict]:
        arr = np.asarray(actions, dtype=np.int64)
        return [
            {
                "op": self.ops.to_op(int(a[4])),
                "selection": [int(a[0]), int(a[1]), int(a[2]), int(a[3])],
            }
            for a in arr
        ]


class FlattenedActions:
    """Single discrete index over an inner composite adapter."""

    kind = "flat"

    def __init__(self, inner):
        if not hasattr(inner, "dims"):
            raise ValueError(f"{type(inner).__name__} actions cannot be flattened")
        self.inner = inner
        self.dims = tuple(inner.dims)
        self.size = prod(self.dims)
        self.encode, self.decode = flatten_action_space(self.dims)

    @property
    def profile(self) -> GridProfile:
        return self.inner.profile

    @property
    def ops(self) -> RestrictedOps:
        return self.inner.ops

    def space(self) -> dict:
        return {"kind": self.kind, "size": self.size, "inner": self.inner.space()}

    def _unflatten_batch(self, flat: np.ndarray) -> np.ndarray:
        flat = np.asarray(flat, dtype=np.int64)
        if flat.size and (flat.min() < 0 or flat.max() >= self.size):
            raise ValueError(f"flat action outside 0..{self.size - 1}")
        coords = []
        for d in reversed(self.dims):
            coords.append(flat % d)
            flat = flat // d
        return np.stack(list(reversed(coords)), axis=1)

    def to_core_batch(self, actions) -> tuple[np.ndarray, np.ndarray]:
        return self.inner.to_core_batch(self._unflatten_batch(actions))

    def to_core(self, action) -> Action:
        return self.inner.to_core(self.decode(int(action)))

    def sample_batch(self, keys, counters):
        words, counters = prng.next_u64_vec(keys, counters)
        return prng.uniform_index_vec(words, self.size).astype(np.int64), counters

    def describe(self, actions) -> list[dict]:
        return self.inner.describe(self._unflatten_batch(actions))


ADAPTERS = {"mask": MaskActions, "point": PointActions, "bbox": BBoxActions}


def make_adapter(kind: str, profile: GridProfile, ops=None, flatten: bool = False):
    opmap = ALL_OPS if ops is None else restrict_ops(ops)
    try:
        adapter = ADAPTERS[kind](profile, opmap)
    except KeyError:
        raise ValueError(f"unknown action parameterization {kind!r}; expected {sorted(ADAPTERS)}")
    return FlattenedActions(adapter) if flatten else adapter


def splice_auto_reset(
    state: BatchState,
    ts: BatchTimestep,
    params: EnvParams,
    buffer: TaskBuffer,
    channels: tuple[str, ...],
) -> tuple[BatchState, BatchTimestep]:
    """Replace terminal lanes with freshly reset episodes.

    The spliced timestep keeps the terminal reward, step-kind, discount
    and diagnostics, but carries the new episode's first observation;
    learners must mask the boundary on step-kind.
    """
    idx = np.flatnonzero(ts.step_kind == StepKind.LAST)
    if idx.size == 0:
        return state, ts
    child_keys, child_counters = prng.split_vec(state.rng_key[idx], state.rng_counter[idx])
    sub_state, sub_ts = envcore.reset_batch(child_keys, child_counters, params, buffer, channels)
    new_state = state.scatter_lanes(idx, sub_state)
    obs = ts.observation.copy()
    obs[idx] = sub_ts.observation
    return new_state, BatchTimestep(
        observation=obs,
        reward=ts.reward,
        step_kind=ts.step_kind,
        discount=ts.discount,
        similarity=ts.similarity,
        solved=ts.solved,
        applied=ts.applied,
    )


def auto_reset(
    state: EnvState,
    timestep: Timestep,
    params: EnvParams,
    buffer: TaskBuffer,
    channels: tuple[str, ...] = envcore.BASE_CHANNELS,
) -> tuple[EnvState, Timestep]:
    """Scalar auto-reset splice; pass-through unless the step was last."""
    if timestep.step_kind is not StepKind.LAST:
        return state, timestep
    bstate = BatchState.from_states([state])
    bts = BatchTimestep(
        observation=timestep.observation[None],
        reward=np.array([timestep.reward]),
        step_kind=np.array([int(timestep.step_kind)], dtype=np.int8),
        discount=np.array([timestep.discount]),
        similarity=np.array([timestep.info["similarity"]]),
        solved=np.array([timestep.info["solved"]]),
        applied=np.array([timestep.info["applied"]]),
    )
    new_bstate, new_bts = splice_auto_reset(bstate, bts, params, buffer, channels)
    return new_bstate.lane(0), new_bts.lane(0)
