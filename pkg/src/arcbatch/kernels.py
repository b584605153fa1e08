"""Lane-vectorized grid-operation kernels.

Every function here operates on stacks of lanes: cell buffers are
(n, rows, cols) int8 arrays, per-lane scalars are (n,) arrays. The
single-environment API is the n=1 case of these kernels, so batched and
sequential execution agree bit-for-bit by construction.

Operation ids (frozen encoding):
  0-9   fill selection with color = id
  10-19 flood fill from a single selected cell with color = id - 10
  20-23 move box contents, wrapping: up, down, left, right
  24-25 rotate square box: 24 clockwise, 25 counterclockwise
  26-27 flip box: 26 horizontal (reverse columns), 27 vertical (reverse rows)
  28    copy selection to clipboard
  29    paste clipboard at selection box top-left, clipped to the grid
  30    cut = copy then clear selection
  31    clear selection to color 0
  32    reset working grid to the episode input grid
  33    resize grid to the selection bounding box
  34    submit

Invalid inputs (flood with != 1 selected cells, rotating a non-square
box, pasting an absent clipboard) are no-ops with applied=False, never
errors: batched execution cannot branch into exceptions.
"""

from __future__ import annotations

import numpy as np

NUM_OPS = 35

MOVE_UP, MOVE_DOWN, MOVE_LEFT, MOVE_RIGHT = 20, 21, 22, 23
ROTATE_CW, ROTATE_CCW = 24, 25
FLIP_H, FLIP_V = 26, 27
OP_COPY, OP_PASTE, OP_CUT = 28, 29, 30
OP_CLEAR, OP_RESET_INPUT, OP_RESIZE, OP_SUBMIT = 31, 32, 33, 34

FLOOD_SWEEPS = 64


def rect_masks(h: np.ndarray, w: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """(n, rows, cols) boolean masks of each lane's logical rectangle."""
    r = np.arange(rows, dtype=np.int32)[None, :, None] < h[:, None, None]
    c = np.arange(cols, dtype=np.int32)[None, None, :] < w[:, None, None]
    return r & c


def bbox_arrays(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Per-lane tight bounding boxes (r0, r1, c0, c1) of nonempty masks."""
    n, rows, cols = mask.shape
    rows_any = mask.any(axis=2)
    cols_any = mask.any(axis=1)
    r0 = rows_any.argmax(axis=1).astype(np.int32)
    r1 = (rows - 1 - rows_any[:, ::-1].argmax(axis=1)).astype(np.int32)
    c0 = cols_any.argmax(axis=1).astype(np.int32)
    c1 = (cols - 1 - cols_any[:, ::-1].argmax(axis=1)).astype(np.int32)
    return r0, r1, c0, c1


def similarity_many(
    a: np.ndarray, ah: np.ndarray, aw: np.ndarray,
    b: np.ndarray, bh: np.ndarray, bw: np.ndarray,
) -> np.ndarray:
    """Matching-cell fraction over the union of logical rectangles, per lane."""
    rows, cols = a.shape[1:]
    ra = rect_masks(ah, aw, rows, cols)
    rb = rect_masks(bh, bw, rows, cols)
    union = np.count_nonzero(ra | rb, axis=(1, 2))
    match = np.count_nonzero(ra & rb & (a == b), axis=(1, 2))
    return match / union


def _gather(cells: np.ndarray, src_r: np.ndarray, src_c: np.ndarray) -> np.ndarray:
    n = cells.shape[0]
    return cells[np.arange(n)[:, None, None], src_r, src_c]


def _flood_components(
    work: np.ndarray, rect: np.ndarray, seed_r: np.ndarray, seed_c: np.ndarray
) -> np.ndarray:
    """4-connected same-color components grown by synchronous sweeps.

    Runs at most FLOOD_SWEEPS whole-grid expansions (stops early at the
    fixed point, which changes nothing); components wider than the sweep
    budget stay truncated by design.
    """
    m = work.shape[0]
    lanes = np.arange(m)
    seed_color = work[lanes, seed_r, seed_c]
    same = (work == seed_color[:, None, None]) & rect
    reach = np.zeros_like(same)
    reach[lanes, seed_r, seed_c] = True
    for _ in range(FLOOD_SWEEPS):
        grown = reach.copy()
        grown[:, 1:, :] |= reach[:, :-1, :]
        grown[:, :-1, :] |= reach[:, 1:, :]
        grown[:, :, 1:] |= reach[:, :, :-1]
        grown[:, :, :-1] |= reach[:, :, 1:]
        grown &= same
        if np.array_equal(grown, reach):
            break
        reach = grown
    return reach


def apply_ops(
    ops: np.ndarray,
    sel: np.ndarray,
    work: np.ndarray, work_h: np.ndarray, work_w: np.ndarray,
    inp: np.ndarray, inp_h: np.ndarray, inp_w: np.ndarray,
    clip: np.ndarray, clip_h: np.ndarray, clip_w: np.ndarray,
    clip_mask: np.ndarray, clip_present: np.ndarray,
    active: np.ndarray | None = None,
):
    """Apply one operation per lane; pure (inputs untouched).

    Returns (work, work_h, work_w, clip, clip_h, clip_w, clip_mask,
    clip_present, submitted, applied). Lanes with active=False pass
    through unchanged with applied=False.
    """
    n, rows, cols = work.shape
    ops = np.asarray(ops, dtype=np.int32)
    if ops.size and (ops.min() < 0 or ops.max() >= NUM_OPS):
        raise ValueError(f"operation ids must be in 0..{NUM_OPS - 1}")
    if active is None:
        active = np.ones(n, dtype=bool)

    new_work = work.copy()
    new_work_h = work_h.copy()
    new_work_w = work_w.copy()
    new_clip = clip.copy()
    new_clip_h = clip_h.copy()
    new_clip_w = clip_w.copy()
    new_clip_mask = clip_mask.copy()
    new_clip_present = clip_present.copy()
    submitted = np.zeros(n, dtype=bool)
    applied = active.copy()

    rect = rect_masks(work_h, work_w, rows, cols)
    eff = sel & rect
    eff_any = eff.any(axis=(1, 2))
    auto = np.where(eff_any[:, None, None], eff, rect)
    r0, r1, c0, c1 = bbox_arrays(auto)
    bh = r1 - r0 + 1
    bw = c1 - c0 + 1

    ROWS = np.arange(rows, dtype=np.int32)[None, :, None]
    COLS = np.arange(cols, dtype=np.int32)[None, None, :]

    def crop_box(src_cells, src_mask, idx):
        """Box contents relocated to the origin, canonically padded."""
        sub_bh = bh[idx][:, None, None]
        sub_bw = bw[idx][:, None, None]
        src_r = np.minimum(ROWS + r0[idx][:, None, None], rows - 1)
        src_c = np.minimum(COLS + c0[idx][:, None, None], cols - 1)
        dest = (ROWS < sub_bh) & (COLS < sub_bw)
        cells = np.where(dest, _gather(src_cells, src_r, src_c), 0).astype(work.dtype)
        mask = _gather(src_mask, src_r, src_c) & dest
        return cells, mask

    # Fill (0-9)
    idx = np.flatnonzero(active & (ops <= 9))
    if idx.size:
        color = ops[idx].astype(work.dtype)[:, None, None]
        new_work[idx] = np.where(auto[idx], color, work[idx])

    # Flood fill (10-19): checked against the raw effective selection,
    # before auto-select, else "exactly one cell" would be unreachable.
    idx = np.flatnonzero(active & (ops >= 10) & (ops <= 19))
    if idx.size:
        one = eff[idx].sum(axis=(1, 2)) == 1
        applied[idx[~one]] = False
        j = idx[one]
        if j.size:
            flat = eff[j].reshape(j.size, rows * cols)
            seed = flat.argmax(axis=1)
            seed_r = (seed // cols).astype(np.int32)
            seed_c = (seed % cols).astype(np.int32)
            comp = _flood_components(work[j], rect[j], seed_r, seed_c)
            color = (ops[j] - 10).astype(work.dtype)[:, None, None]
            new_work[j] = np.where(comp, color, work[j])

    # Movement (20-23): box contents shift one cell, wrapping at box edges.
    idx = np.flatnonzero(active & (ops >= MOVE_UP) & (ops <= MOVE_RIGHT))
    if idx.size:
        sub = ops[idx]
        dr = np.where(sub == MOVE_UP, 1, 0) + np.where(sub == MOVE_DOWN, -1, 0)
        dc = np.where(sub == MOVE_LEFT, 1, 0) + np.where(sub == MOVE_RIGHT, -1, 0)
        br0 = r0[idx][:, None, None]
        bc0 = c0[idx][:, None, None]
        in_box = (ROWS >= br0) & (ROWS <= r1[idx][:, None, None]) \
            & (COLS >= bc0) & (COLS <= c1[idx][:, None, None])
        src_r = np.where(in_box, br0 + (ROWS - br0 + dr[:, None, None]) % bh[idx][:, None, None], ROWS)
        src_c = np.where(in_box, bc0 + (COLS - bc0 + dc[:, None, None]) % bw[idx][:, None, None], COLS)
        new_work[idx] = _gather(work[idx], src_r, src_c)

    # Rotation (24-25): square boxes only.
    idx = np.flatnonzero(active & ((ops == ROTATE_CW) | (ops == ROTATE_CCW)))
    if idx.size:
        square = bh[idx] == bw[idx]
        applied[idx[~square]] = False
        j = idx[square]
        if j.size:
            br0 = r0[j][:, None, None]
            bc0 = c0[j][:, None, None]
            side = bh[j][:, None, None]
            in_box = (ROWS >= br0) & (ROWS <= r1[j][:, None, None]) \
                & (COLS >= bc0) & (COLS <= c1[j][:, None, None])
            cw = (ops[j] == ROTATE_CW)[:, None, None]
            src_r = np.where(in_box, np.where(cw, br0 + side - 1 - (COLS - bc0), br0 + (COLS - bc0)), ROWS)
            src_c = np.where(in_box, np.where(cw, bc0 + (ROWS - br0), bc0 + side - 1 - (ROWS - br0)), COLS)
            new_work[j] = _gather(work[j], src_r, src_c)

    # Flips (26-27).
    idx = np.flatnonzero(active & ((ops == FLIP_H) | (ops == FLIP_V)))
    if idx.size:
        br0 = r0[idx][:, None, None]
        bc0 = c0[idx][:, None, None]
        in_box = (ROWS >= br0) & (ROWS <= r1[idx][:, None, None]) \
            & (COLS >= bc0) & (COLS <= c1[idx][:, None, None])
        horizontal = (ops[idx] == FLIP_H)[:, None, None]
        src_r = np.where(in_box & ~horizontal, br0 + bh[idx][:, None, None] - 1 - (ROWS - br0), ROWS)
        src_c = np.where(in_box & horizontal, bc0 + bw[idx][:, None, None] - 1 - (COLS - bc0), COLS)
        new_work[idx] = _gather(work[idx], src_r, src_c)

    # Copy / cut (28, 30): clipboard gets the box crop plus the selected
    # cells as a box-local shape mask.
    idx = np.flatnonzero(active & ((ops == OP_COPY) | (ops == OP_CUT)))
    if idx.size:
        cells, mask = crop_box(work[idx], auto[idx], idx)
        new_clip[idx] = cells
        new_clip_mask[idx] = mask
        new_clip_h[idx] = bh[idx]
        new_clip_w[idx] = bw[idx]
        new_clip_present[idx] = True
        cut = idx[ops[idx] == OP_CUT]
        if cut.size:
            new_work[cut] = np.where(auto[cut], 0, work[cut]).astype(work.dtype)

    # Paste (29): clipboard cells land at the selection-box top-left.
    idx = np.flatnonzero(active & (ops == OP_PASTE))
    if idx.size:
        present = clip_present[idx]
        applied[idx[~present]] = False
        j = idx[present]
        if j.size:
            ar = r0[j][:, None, None]
            ac = c0[j][:, None, None]
            src_r = ROWS - ar
            src_c = COLS - ac
            valid = (src_r >= 0) & (src_c >= 0)
            safe_r = np.clip(src_r, 0, rows - 1)
            safe_c = np.clip(src_c, 0, cols - 1)
            vals = _gather(clip[j], safe_r, safe_c)
            stamp = _gather(clip_mask[j], safe_r, safe_c)
            write = valid & stamp & rect[j]
            new_work[j] = np.where(write, vals, work[j])

    # Clear (31).
    idx = np.flatnonzero(active & (ops == OP_CLEAR))
    if idx.size:
        new_work[idx] = np.where(auto[idx], 0, work[idx]).astype(work.dtype)

    # Reset to input (32).
    idx = np.flatnonzero(active & (ops == OP_RESET_INPUT))
    if idx.size:
        new_work[idx] = inp[idx]
        new_work_h[idx] = inp_h[idx]
        new_work_w[idx] = inp_w[idx]

    # Resize to selection box (33).
    idx = np.flatnonzero(active & (ops == OP_RESIZE))
    if idx.size:
        cells, _ = crop_box(work[idx], auto[idx], idx)
        new_work[idx] = cells
        new_work_h[idx] = bh[idx]
        new_work_w[idx] = bw[idx]

    # Submit (34).
    idx = np.flatnonzero(active & (ops == OP_SUBMIT))
    if idx.size:
        submitted[idx] = True

    return (
        new_work, new_work_h, new_work_w,
        new_clip, new_clip_h, new_clip_w, new_clip_mask, new_clip_present,
        submitted, applied,
    )
