import re
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from arcbatch import rng
from arcbatch.env import Action, EnvParams, reset, step
from arcbatch.grids import MINI, pad_into_buffer
from arcbatch.render import (
    MARGIN,
    Palette,
    RenderSpec,
    render_complete_task,
    render_complete_task_terminal,
    render_pair,
    render_pair_terminal,
    render_rl_step,
    render_rl_step_terminal,
    render_single,
    render_single_terminal,
)
from arcbatch.tasks import build_task_buffer, generate_synthetic_tasks
from conftest import grid, make_task

GOLDEN = Path(__file__).parent / "golden"


def fixture_task():
    return generate_synthetic_tasks(3, MINI, seed=17)[2]


def fixture_transition():
    g_in = grid([1, 2], [3, 4])
    g_out = grid([4, 3], [2, 1])
    buffer = build_task_buffer([make_task("t", demos=[(g_in, g_out)])], MINI)
    params = EnvParams(profile=MINI)
    state, _ = reset(rng.from_seed(0), params, buffer)
    sel = np.zeros((5, 5), dtype=bool)
    sel[0, :2] = True
    action = Action(7, sel)
    after, ts = step(state, action, params)
    return state, action, after, ts.reward


class TestSvgLayout:
    def test_size_arithmetic(self):
        g = pad_into_buffer(grid([1, 2, 3], [4, 5, 6]), MINI)  # 2x3
        svg = render_single(g, RenderSpec(cell_px=10))
        assert f'width="{3 * 10 + 2 * MARGIN}"' in svg
        assert f'height="{2 * 10 + 2 * MARGIN}"' in svg

    def test_single_cell(self):
        g = pad_into_buffer(grid([3]), MINI)
        svg = render_single(g)
        assert svg.count("<rect") == 1
        assert Palette().rgb[3] in svg

    def test_padding_not_drawn(self):
        g = pad_into_buffer(grid([1]), MINI)
        assert render_single(g).count("<rect") == 1

    def test_pair_panels_independent_sizes(self):
        a = pad_into_buffer(grid([1]), MINI)
        b = pad_into_buffer(grid([1, 2], [3, 4], [5, 6]), MINI)
        svg = render_pair(a, b, RenderSpec(cell_px=10))
        assert svg.count("<rect") == 7
        assert f'height="{3 * 10 + 2 * MARGIN}"' in svg

    def test_determinism(self):
        g = pad_into_buffer(grid([1, 2], [3, 4]), MINI)
        assert render_single(g) == render_single(g)

    def test_well_formed_xml_and_palette_colors(self):
        task = fixture_task()
        svg = render_complete_task(task)
        root = ET.fromstring(svg)
        assert root.tag.endswith("svg")
        pal = Palette()
        allowed = set(pal.rgb) | {"none", pal.grid_line, pal.highlight, "#000000"}
        for fill in re.findall(r'fill="([^"]+)"', svg):
            assert fill in allowed

    def test_rl_step_caption(self):
        before, action, after, reward = fixture_transition()
        svg = render_rl_step(before, action, after, reward)
        assert f"reward {reward:+.2f}" in svg
        assert "op 7" in svg
        assert 'stroke-width="2"' in svg  # selection highlight outline

    def test_rl_step_noop_identical_panels(self):
        before, action, after, _ = fixture_transition()
        svg = render_rl_step(before, Action(29, action.selection), before, -0.02)
        assert "reward -0.02" in svg

    def test_complete_task_hides_test_outputs(self):
        # test output uses color 9 nowhere else in the task
        task = make_task(
            "t",
            demos=[(grid([1]), grid([2]))],
            tests=[(grid([3]), grid([9]))],
        )
        svg = render_complete_task(task)
        pal = Palette()
        assert pal.rgb[9] not in svg
        assert pal.rgb[3] in svg

    def test_cell_px_validated(self):
        with pytest.raises(ValueError):
            RenderSpec(cell_px=0)

    def test_palette_needs_distinct_colors(self):
        with pytest.raises(ValueError):
            Palette(rgb=("#000000",) * 10)


class TestTerminal:
    def test_ascii_digits(self):
        g = pad_into_buffer(grid([1, 2], [3, 4]), MINI)
        text = render_single_terminal(g, ansi=False)
        lines = text.splitlines()
        assert lines[1] == "|1 2 |"
        assert lines[2] == "|3 4 |"

    def test_width_bound(self):
        g = pad_into_buffer(grid([1, 2, 3]), MINI)
        for line in render_single_terminal(g, ansi=False).splitlines():
            assert len(line) <= 2 * 3 + 2

    def test_ansi_cells(self):
        g = pad_into_buffer(grid([5]), MINI)
        text = render_single_terminal(g, ansi=True)
        assert f"\x1b[48;5;{Palette().term256[5]}m" in text
        assert "\x1b[0m" in text

    def test_pair_side_by_side(self):
        a = pad_into_buffer(grid([1]), MINI)
        b = pad_into_buffer(grid([2]), MINI)
        text = render_pair_terminal(a, b, ansi=False)
        assert "|1 |  |2 |" in text

    def test_rl_step_caption(self):
        before, action, after, reward = fixture_transition()
        text = render_rl_step_terminal(before, action, after, reward, ansi=False)
        assert text.endswith(f"op 7  reward {reward:+.2f}\n")


class TestGoldenFiles:
    CASES = ["single", "pair", "rl_step", "complete_task", "terminal_ascii"]

    def render_case(self, name: str) -> str:
        spec = RenderSpec(cell_px=12)
        task = fixture_task()
        if name == "single":
            return render_single(pad_into_buffer(task.demo_pairs[0][0], MINI), spec)
        if name == "pair":
            a, b = task.demo_pairs[0]
            return render_pair(pad_into_buffer(a, MINI), pad_into_buffer(b, MINI), spec)
        if name == "rl_step":
            return render_rl_step(*fixture_transition(), spec)
        if name == "complete_task":
            return render_complete_task(task, spec)
        if name == "terminal_ascii":
            return render_complete_task_terminal(task, spec, ansi=False)
        raise AssertionError(name)

    @pytest.mark.parametrize("name", CASES)
    def test_matches_golden(self, name):
        ext = "txt" if name.startswith("terminal") else "svg"
        golden = GOLDEN / f"{name}.{ext}"
        assert golden.exists(), f"missing golden file {golden}"
        assert self.render_case(name) == golden.read_text()

    @pytest.mark.parametrize("name", CASES)
    def test_repeat_renders_identical(self, name):
        assert self.render_case(name) == self.render_case(name)
