import numpy as np
import pytest

from arcbatch import kernels
from arcbatch.grids import MINI, PaddedGrid, pad_into_buffer
from arcbatch.ops import Clipboard, apply_operation, empty_clipboard
from conftest import grid
from reference import random_ref_state, random_selection, ref_apply

ROWS = COLS = 5


def as_state(working, inp=None, clipboard=None):
    working = pad_into_buffer(working, MINI)
    inp = pad_into_buffer(inp, MINI) if inp is not None else working
    clipboard = clipboard or empty_clipboard(MINI.shape)
    return working, inp, clipboard


def mask(*cells):
    m = np.zeros((ROWS, COLS), dtype=bool)
    for r, c in cells:
        m[r, c] = True
    return m


def full_mask():
    return np.ones((ROWS, COLS), dtype=bool)


def apply_op(op, sel, working, inp=None, clipboard=None):
    w, i, c = as_state(working, inp, clipboard)
    return apply_operation(op, sel, w, i, c)


class TestFill:
    def test_full_selection(self):
        out = apply_op(3, full_mask(), np.zeros((2, 2), dtype=int))
        assert np.array_equal(out.working.crop(), np.full((2, 2), 3))
        assert out.applied

    def test_single_cell(self):
        out = apply_op(9, mask((0, 1)), np.zeros((2, 2), dtype=int))
        assert out.working.cells[0, 1] == 9
        assert out.working.cells[0, 0] == 0

    def test_empty_mask_autoselects(self):
        out = apply_op(5, mask(), np.zeros((3, 3), dtype=int))
        assert np.array_equal(out.working.crop(), np.full((3, 3), 5))


class TestFloodFill:
    def test_fills_connected_component(self):
        out = apply_op(14, mask((1, 1)), np.zeros((3, 3), dtype=int))
        assert np.array_equal(out.working.crop(), np.full((3, 3), 4))
        assert out.applied

    def test_same_color_is_identity(self):
        g = np.zeros((3, 3), dtype=int)
        out = apply_op(10, mask((1, 1)), g)
        assert np.array_equal(out.working.crop(), g)
        assert out.applied

    def test_two_selected_cells_noop(self):
        g = np.zeros((3, 3), dtype=int)
        out = apply_op(14, mask((0, 0), (1, 1)), g)
        assert not out.applied
        assert np.array_equal(out.working.crop(), g)

    def test_empty_selection_noop(self):
        out = apply_op(14, mask(), np.zeros((3, 3), dtype=int))
        assert not out.applied

    def test_four_connectivity_excludes_diagonal(self):
        g = grid(
            [1, 1, 0],
            [1, 0, 0],
            [0, 0, 1],
        )
        out = apply_op(12, mask((0, 0)), g)
        expected = grid(
            [2, 2, 0],
            [2, 0, 0],
            [0, 0, 1],
        )
        assert np.array_equal(out.working.crop(), expected)

    def test_restricted_to_logical_region(self):
        # color-0 component must not leak into the zero padding
        out = apply_op(17, mask((0, 0)), np.zeros((2, 2), dtype=int))
        assert np.array_equal(out.working.crop(), np.full((2, 2), 7))
        assert out.working.cells[2:, :].sum() == 0


class TestMove:
    def test_wrap_right(self):
        out = apply_op(23, full_mask(), grid([1, 2, 3]))
        assert np.array_equal(out.working.crop(), grid([3, 1, 2]))

    def test_wrap_left(self):
        out = apply_op(22, full_mask(), grid([1, 2, 3]))
        assert np.array_equal(out.working.crop(), grid([2, 3, 1]))

    def test_single_cell_box_identity(self):
        g = grid([1, 2], [3, 4])
        for op in (20, 21, 22, 23):
            out = apply_op(op, mask((1, 1)), g)
            assert np.array_equal(out.working.crop(), g)

    def test_period_equals_extent(self):
        g = grid([1, 2, 3], [4, 5, 6])
        w, i, c = as_state(g)
        cur = w
        for _ in range(3):
            cur = apply_operation(23, full_mask(), cur, i, c).working
        assert np.array_equal(cur.crop(), g)

    def test_moves_whole_box_not_only_selected(self):
        # selection corners (0,0) and (1,1): box is the full 2x2
        g = grid([1, 2], [3, 4])
        out = apply_op(21, mask((0, 0), (1, 1)), g)
        assert np.array_equal(out.working.crop(), grid([3, 4], [1, 2]))


class TestRotate:
    def test_clockwise(self):
        out = apply_op(24, full_mask(), grid([1, 2], [3, 4]))
        assert np.array_equal(out.working.crop(), grid([3, 1], [4, 2]))

    def test_non_square_noop(self):
        g = grid([1, 2, 3], [4, 5, 6])
        out = apply_op(24, full_mask(), g)
        assert not out.applied
        assert np.array_equal(out.working.crop(), g)

    def test_four_rotations_identity(self):
        gen = np.random.default_rng(2)
        for _ in range(50):
            n = int(gen.integers(1, 6))
            g = gen.integers(0, 10, size=(n, n))
            w, i, c = as_state(g)
            cur = w
            for _ in range(4):
                cur = apply_operation(24, full_mask(), cur, i, c).working
            assert np.array_equal(cur.cells, w.cells)

    def test_cw_then_ccw_identity(self):
        g = grid([1, 2], [3, 4])
        w, i, c = as_state(g)
        once = apply_operation(24, full_mask(), w, i, c).working
        back = apply_operation(25, full_mask(), once, i, c).working
        assert np.array_equal(back.cells, w.cells)


class TestFlip:
    def test_horizontal_reverses_columns(self):
        out = apply_op(26, full_mask(), grid([1, 2, 3]))
        assert np.array_equal(out.working.crop(), grid([3, 2, 1]))

    def test_vertical_reverses_rows(self):
        out = apply_op(27, full_mask(), grid([1, 2], [3, 4]))
        assert np.array_equal(out.working.crop(), grid([3, 4], [1, 2]))

    def test_involution(self):
        gen = np.random.default_rng(3)
        for op in (26, 27):
            for _ in range(50):
                h, w_ = int(gen.integers(1, 6)), int(gen.integers(1, 6))
                g = gen.integers(0, 10, size=(h, w_))
                w, i, c = as_state(g)
                twice = apply_operation(
                    op, full_mask(),
                    apply_operation(op, full_mask(), w, i, c).working, i, c,
                ).working
                assert np.array_equal(twice.cells, w.cells)


class TestClipboard:
    def test_copy_full_grid(self):
        g = grid([1, 2], [3, 4])
        out = apply_op(28, full_mask(), g)
        assert np.array_equal(out.clipboard.grid.cells, out.working.cells)
        assert out.clipboard.present
        assert out.clipboard.shape_mask[:2, :2].all()
        assert not out.clipboard.shape_mask[2:, :].any()

    def test_copy_l_shape(self):
        g = grid([1, 2, 3], [4, 5, 6], [7, 8, 9])
        sel = mask((0, 0), (1, 0), (1, 1))
        out = apply_op(28, sel, g)
        assert (out.clipboard.grid.height, out.clipboard.grid.width) == (2, 2)
        assert np.array_equal(out.clipboard.grid.crop(), grid([1, 2], [4, 5]))
        assert np.array_equal(
            out.clipboard.shape_mask[:2, :2], np.array([[True, False], [True, True]])
        )

    def test_copy_idempotent(self):
        g = grid([1, 2], [3, 4])
        w, i, c = as_state(g)
        once = apply_operation(28, mask((0, 1)), w, i, c)
        twice = apply_operation(28, mask((0, 1)), once.working, i, once.clipboard)
        assert np.array_equal(once.clipboard.grid.cells, twice.clipboard.grid.cells)
        assert np.array_equal(once.clipboard.shape_mask, twice.clipboard.shape_mask)

    def test_copy_paste_round_trip(self):
        g = grid([1, 2], [3, 4])
        w, i, c = as_state(g)
        copied = apply_operation(28, full_mask(), w, i, c)
        pasted = apply_operation(29, full_mask(), copied.working, i, copied.clipboard)
        assert np.array_equal(pasted.working.cells, w.cells)

    def test_paste_clipped_at_corner(self):
        g = grid([1, 2, 0], [3, 4, 0], [0, 0, 0])
        w, i, c = as_state(g)
        copied = apply_operation(28, mask((0, 0), (1, 1)), w, i, c)
        pasted = apply_operation(29, mask((2, 2)), copied.working, i, copied.clipboard)
        assert pasted.working.cells[2, 2] == 1
        assert pasted.applied
        assert np.array_equal(pasted.working.crop()[:2, :2], grid([1, 2], [3, 4]))

    def test_paste_empty_clipboard_noop(self):
        out = apply_op(29, full_mask(), grid([1, 2], [3, 4]))
        assert not out.applied

    def test_cut_equals_copy_then_clear(self):
        g = grid([5, 5], [5, 5])
        out = apply_op(30, full_mask(), g)
        assert np.array_equal(out.clipboard.grid.crop(), g)
        assert not out.working.cells.any()

    def test_cut_then_paste_restores(self):
        g = grid([1, 2, 3], [4, 5, 6], [7, 8, 9])
        sel = mask((0, 0), (1, 1), (2, 2))
        w, i, c = as_state(g)
        cut = apply_operation(30, sel, w, i, c)
        pasted = apply_operation(29, sel, cut.working, i, cut.clipboard)
        assert np.array_equal(pasted.working.cells, w.cells)

    def test_cut_single_cell(self):
        g = grid([0, 0], [0, 7])
        out = apply_op(30, mask((1, 1)), g)
        assert out.clipboard.grid.crop().tolist() == [[7]]
        assert out.working.cells[1, 1] == 0


class TestSpecial:
    def test_clear_full(self):
        out = apply_op(31, full_mask(), grid([1, 2], [3, 4]))
        assert not out.working.cells.any()

    def test_clear_autoselects(self):
        out = apply_op(31, mask(), grid([1, 2], [3, 4]))
        assert not out.working.cells.any()

    def test_clear_idempotent(self):
        g = grid([1, 2], [3, 4])
        w, i, c = as_state(g)
        once = apply_operation(31, mask((0, 0)), w, i, c).working
        twice = apply_operation(31, mask((0, 0)), once, i, c).working
        assert np.array_equal(once.cells, twice.cells)

    def test_reset_to_input(self):
        inp = grid([9, 9], [9, 9])
        out = apply_op(4, full_mask(), grid([1, 2], [3, 4]), inp=inp)
        reset = apply_operation(32, mask(), out.working, pad_into_buffer(inp, MINI),
                                out.clipboard)
        assert np.array_equal(reset.working.crop(), inp)

    def test_reset_restores_dims_after_resize(self):
        g = grid([1, 2, 3], [4, 5, 6], [7, 8, 9])
        w, i, c = as_state(g)
        resized = apply_operation(33, mask((1, 1)), w, i, c)
        assert (resized.working.height, resized.working.width) == (1, 1)
        reset = apply_operation(32, mask(), resized.working, i, c)
        assert (reset.working.height, reset.working.width) == (3, 3)
        assert np.array_equal(reset.working.cells, w.cells)

    def test_resize_full_selection_identity(self):
        g = grid([1, 2], [3, 4])
        out = apply_op(33, full_mask(), g)
        assert np.array_equal(out.working.cells, as_state(g)[0].cells)

    def test_resize_to_middle_box(self):
        g = np.arange(16).reshape(4, 4) % 10
        out = apply_op(33, mask((1, 1), (2, 2)), g.astype(int))
        assert (out.working.height, out.working.width) == (2, 2)
        assert np.array_equal(out.working.crop(), g[1:3, 1:3])
        assert not out.working.cells[2:, :].any()

    def test_submit(self):
        g = grid([1, 2], [3, 4])
        out = apply_op(34, full_mask(), g)
        assert out.submitted
        assert np.array_equal(out.working.cells, as_state(g)[0].cells)

    def test_only_submit_sets_flag(self):
        g = grid([1, 2], [3, 4])
        for op in range(34):
            assert not apply_op(op, full_mask(), g).submitted


class TestDispatcher:
    def test_fill_color_from_op_id(self):
        out = apply_op(7, mask(), np.zeros((2, 2), dtype=int))
        assert np.array_equal(out.working.crop(), np.full((2, 2), 7))

    def test_invalid_op_id(self):
        g = grid([1])
        with pytest.raises(ValueError, match="0..34"):
            apply_op(35, full_mask(), g)
        with pytest.raises(ValueError, match="0..34"):
            apply_op(-1, full_mask(), g)

    def test_purity(self):
        gen = np.random.default_rng(4)
        st = random_ref_state(gen, ROWS, COLS)
        sel = random_selection(gen, ROWS, COLS)
        working = PaddedGrid(st.work.copy(), st.h, st.w)
        inp = PaddedGrid(st.inp.copy(), st.ih, st.iw)
        clip = Clipboard(PaddedGrid(st.clip.copy(), st.ch, st.cw), st.cmask.copy(), st.present)
        for op in range(35):
            a = apply_operation(op, sel, working, inp, clip)
            b = apply_operation(op, sel, working, inp, clip)
            assert np.array_equal(a.working.cells, b.working.cells)
            assert np.array_equal(working.cells, st.work)  # inputs untouched
            assert np.array_equal(clip.shape_mask, st.cmask)


def _batch_from_ref(states, sels, ops):
    n = len(states)
    return dict(
        ops=np.array(ops, dtype=np.int32),
        sel=np.stack(sels),
        work=np.stack([s.work for s in states]),
        work_h=np.array([s.h for s in states], np.int32),
        work_w=np.array([s.w for s in states], np.int32),
        inp=np.stack([s.inp for s in states]),
        inp_h=np.array([s.ih for s in states], np.int32),
        inp_w=np.array([s.iw for s in states], np.int32),
        clip=np.stack([s.clip for s in states]),
        clip_h=np.array([s.ch for s in states], np.int32),
        clip_w=np.array([s.cw for s in states], np.int32),
        clip_mask=np.stack([s.cmask for s in states]),
        clip_present=np.array([s.present for s in states], bool),
    )


def run_oracle_comparison(cases: int, seed: int, rows: int = ROWS, cols: int = COLS):
    """Engine kernels vs the naive reference on `cases` random states,
    every op id covered; returns the number of mismatching lanes."""
    gen = np.random.default_rng(seed)
    states = [random_ref_state(gen, rows, cols) for _ in range(cases)]
    sels = [random_selection(gen, rows, cols) for _ in range(cases)]
    ops = [i % 35 for i in range(cases)]
    batch = _batch_from_ref(states, sels, ops)
    (work, work_h, work_w, clip, clip_h, clip_w, clip_mask, clip_present,
     submitted, applied) = kernels.apply_ops(**batch)
    bad = 0
    for i in range(cases):
        ref, ref_sub, ref_app = ref_apply(ops[i], sels[i], states[i])
        same = (
            np.array_equal(work[i], ref.work)
            and (int(work_h[i]), int(work_w[i])) == (ref.h, ref.w)
            and np.array_equal(clip[i], ref.clip)
            and (int(clip_h[i]), int(clip_w[i])) == (ref.ch, ref.cw)
            and np.array_equal(clip_mask[i], ref.cmask)
            and bool(clip_present[i]) == ref.present
            and bool(submitted[i]) == ref_sub
            and bool(applied[i]) == ref_app
        )
        bad += not same
    return bad


def test_oracle_suite_small():
    assert run_oracle_comparison(3500, seed=11) == 0


def test_oracle_suite_full_capacity():
    assert run_oracle_comparison(350, seed=13, rows=30, cols=30) == 0


def test_closure_invariants_fuzz():
    # every outcome is a valid padded grid: dims in range, colors 0..9,
    # canonical zero padding, clipboard mask canonical
    for rows, cols, cases, seed in ((5, 5, 1400, 21), (30, 30, 140, 22)):
        gen = np.random.default_rng(seed)
        states = [random_ref_state(gen, rows, cols) for _ in range(cases)]
        sels = [random_selection(gen, rows, cols) for _ in range(cases)]
        ops = [int(gen.integers(0, 35)) for _ in range(cases)]
        batch = _batch_from_ref(states, sels, ops)
        (work, work_h, work_w, clip, clip_h, clip_w, clip_mask, clip_present,
         *_rest) = kernels.apply_ops(**batch)
        rect = kernels.rect_masks(work_h, work_w, rows, cols)
        assert work_h.min() >= 1 and work_w.min() >= 1
        assert work_h.max() <= rows and work_w.max() <= cols
        assert work.min() >= 0 and work.max() <= 9
        assert not work[~rect].any()
        crect = kernels.rect_masks(clip_h, clip_w, rows, cols)
        assert not clip[~crect].any()
        assert not clip_mask[~crect].any()
