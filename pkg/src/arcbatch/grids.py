"""Fixed-capacity grids, selection masks, bounding boxes and similarity.

Grids live in a fixed-capacity buffer (rows x cols, default 30x30 with a
5x5 profile for small-grid datasets) with an explicit logical height and
width. Cells outside the logical rectangle always hold 0, so two grids
with equal logical content are bit-identical buffers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NUM_COLORS = 10
PADDING_COLOR = 0
SENTINEL = 10  # observation encoding for cells outside the logical region

CELL_DTYPE = np.int8


@dataclass(frozen=True)
class GridProfile:
    """Capacity profile: the fixed buffer shape all grids share."""

    rows: int
    cols: int

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)


FULL = GridProfile(30, 30)
MINI = GridProfile(5, 5)

_PROFILES = {"full": FULL, "mini": MINI}


def profile_by_name(name: str) -> GridProfile:
    try:
        return _PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown grid profile {name!r}; expected one of {sorted(_PROFILES)}")


@dataclass(frozen=True)
class PaddedGrid:
    """A color grid in a fixed-capacity buffer with logical (height, width).

    Invariants: 1 <= height <= rows, 1 <= width <= cols, in-region colors
    in 0..9, out-of-region cells exactly 0.
    """

    cells: np.ndarray  # (rows, cols) int8, read-only
    height: int
    width: int

    @property
    def capacity(self) -> tuple[int, int]:
        return self.cells.shape

    def crop(self) -> np.ndarray:
        """The logical region as an (height, width) array."""
        return self.cells[: self.height, : self.width]

    def region_mask(self) -> np.ndarray:
        """Boolean capacity-shaped mask of the logical rectangle."""
        return rectangle_mask(self.height, self.width, self.cells.shape)


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive cell-index box; construct via bounding_box()."""

    r0: int
    c0: int
    r1: int
    c1: int

    @property
    def height(self) -> int:
        return self.r1 - self.r0 + 1

    @property
    def width(self) -> int:
        return self.c1 - self.c0 + 1


def rectangle_mask(height: int, width: int, capacity: tuple[int, int]) -> np.ndarray:
    m = np.zeros(capacity, dtype=bool)
    m[:height, :width] = True
    return m


def empty_grid(profile: GridProfile = MINI) -> PaddedGrid:
    """The canonical empty grid: 1x1, color 0."""
    cells = np.zeros(profile.shape, dtype=CELL_DTYPE)
    return PaddedGrid(cells=cells, height=1, width=1)


def pad_into_buffer(raw, profile: GridProfile = FULL) -> PaddedGrid:
    """Embed a raw h x w color matrix into a fixed-capacity buffer.

    Raises ValueError for dimensions outside 1..capacity or colors
    outside 0..9 (malformed dataset input).
    """
    arr = np.asarray(raw)
    if arr.ndim != 2:
        raise ValueError(f"grid must be 2-dimensional, got shape {arr.shape}")
    h, w = arr.shape
    if not (1 <= h <= profile.rows and 1 <= w <= profile.cols):
        raise ValueError(
            f"grid dimensions {h}x{w} outside capacity {profile.rows}x{profile.cols}"
        )
    if arr.size and (arr.min() < 0 or arr.max() >= NUM_COLORS):
        raise ValueError(f"grid colors must be in 0..{NUM_COLORS - 1}")
    cells = np.zeros(profile.shape, dtype=CELL_DTYPE)
    cells[:h, :w] = arr
    return PaddedGrid(cells=cells, height=h, width=w)


def grids_equal(a: PaddedGrid, b: PaddedGrid) -> bool:
    """Equal logical content (and, by canonical padding, equal buffers)."""
    return (
        a.height == b.height
        and a.width == b.width
        and bool(np.array_equal(a.cells, b.cells))
    )


def similarity(working: PaddedGrid, target: PaddedGrid) -> float:
    """Fraction of matching cells over the union of the logical rectangles.

    1.0 iff shapes match and every in-region color matches; shape
    mismatches shrink the score through the union denominator.
    """
    va = working.region_mask()
    vb = target.region_mask()
    union = int(np.count_nonzero(va | vb))
    matches = int(np.count_nonzero(va & vb & (working.cells == target.cells)))
    return matches / union


def effective_mask(mask: np.ndarray, grid: PaddedGrid) -> np.ndarray:
    """Selection bits restricted to the grid's logical rectangle."""
    return mask & grid.region_mask()


def auto_select(mask: np.ndarray, grid: PaddedGrid) -> np.ndarray:
    """Substitute the full logical rectangle when the selection is empty."""
    eff = effective_mask(mask, grid)
    if not eff.any():
        return grid.region_mask()
    return eff


def bounding_box(mask: np.ndarray, grid: PaddedGrid) -> BoundingBox | None:
    """Tightest box covering the effective selection; None when empty."""
    eff = effective_mask(mask, grid)
    rows = np.flatnonzero(eff.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(eff.any(axis=0))
    return BoundingBox(r0=int(rows[0]), c0=int(cols[0]), r1=int(rows[-1]), c1=int(cols[-1]))
