"""Single-grid operation API over the lane-vectorized kernels.

apply_operation routes an (op id, selection mask) pair to the matching
transformation of (working grid, clipboard). Category encoding and
invalid-input no-op semantics are documented in kernels.py; this module
is the n=1 view used by the scalar environment, the renderers and tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .grids import CELL_DTYPE, PaddedGrid

NUM_OPS = kernels.NUM_OPS


@dataclass(frozen=True)
class Clipboard:
    """Copied region: box crop plus the box-local mask of copied cells."""

    grid: PaddedGrid
    shape_mask: np.ndarray  # (rows, cols) bool, box-local, canonical outside
    present: bool


def empty_clipboard(capacity: tuple[int, int]) -> Clipboard:
    return Clipboard(
        grid=PaddedGrid(np.zeros(capacity, dtype=CELL_DTYPE), 1, 1),
        shape_mask=np.zeros(capacity, dtype=bool),
        present=False,
    )


@dataclass(frozen=True)
class OpOutcome:
    working: PaddedGrid
    clipboard: Clipboard
    submitted: bool
    applied: bool


def apply_operation(
    op: int,
    selection: np.ndarray,
    working: PaddedGrid,
    input_grid: PaddedGrid,
    clipboard: Clipboard,
) -> OpOutcome:
    """Apply one operation; pure, inputs untouched.

    Raises ValueError for op ids outside 0..34 (unreachable through the
    wrapped action spaces); invalid inputs within the range are no-ops
    with applied=False.
    """
    ops = np.array([op], dtype=np.int32)
    sel = selection[None, :, :]
    (work, work_h, work_w, clip, clip_h, clip_w, clip_mask, clip_present,
     submitted, applied) = kernels.apply_ops(
        ops, sel,
        working.cells[None], np.array([working.height], np.int32),
        np.array([working.width], np.int32),
        input_grid.cells[None], np.array([input_grid.height], np.int32),
        np.array([input_grid.width], np.int32),
        clipboard.grid.cells[None], np.array([clipboard.grid.height], np.int32),
        np.array([clipboard.grid.width], np.int32),
        clipboard.shape_mask[None], np.array([clipboard.present], bool),
    )
    return OpOutcome(
        working=PaddedGrid(work[0], int(work_h[0]), int(work_w[0])),
        clipboard=Clipboard(
            grid=PaddedGrid(clip[0], int(clip_h[0]), int(clip_w[0])),
            shape_mask=clip_mask[0],
            present=bool(clip_present[0]),
        ),
        submitted=bool(submitted[0]),
        applied=bool(applied[0]),
    )
