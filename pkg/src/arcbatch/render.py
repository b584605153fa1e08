"""Grid renderers: SVG documents and terminal (ANSI / plain ASCII) views.

Four views: a single grid, an input/output pair, one environment
transition (before/after panels with the selection highlighted and the
reward captioned), and a whole task (demonstration pairs stacked above
the test inputs). All output is deterministic byte-for-byte for fixed
inputs; golden-file tests rely on that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import PaddedGrid

# The de-facto 10-color puzzle palette; override via Palette.
_DEFAULT_RGB = (
    "#000000",  # 0 black
    "#0074D9",  # 1 blue
    "#FF4136",  # 2 red
    "#2ECC40",  # 3 green
    "#FFDC00",  # 4 yellow
    "#AAAAAA",  # 5 grey
    "#F012BE",  # 6 magenta
    "#FF851B",  # 7 orange
    "#7FDBFF",  # 8 azure
    "#870C25",  # 9 maroon
)
_DEFAULT_TERM256 = (16, 32, 196, 40, 220, 248, 199, 208, 117, 88)

MARGIN = 4       # px border around every SVG drawing
PANEL_GAP = 12   # px between panels
CAPTION_H = 16   # px reserved for a caption line


@dataclass(frozen=True)
class Palette:
    rgb: tuple[str, ...] = _DEFAULT_RGB
    term256: tuple[int, ...] = _DEFAULT_TERM256
    grid_line: str = "#404040"
    highlight: str = "#FFFFFF"

    def __post_init__(self):
        if len(self.rgb) != 10 or len(set(self.rgb)) != 10:
            raise ValueError("palette needs 10 distinct colors")


@dataclass(frozen=True)
class RenderSpec:
    mode: str = "single"  # single | pair | rl_step | complete_task
    cell_px: int = 20
    show_reward: bool = True
    highlight: np.ndarray | None = None
    palette: Palette = Palette()

    def __post_init__(self):
        if self.cell_px < 1:
            raise ValueError("cell_px must be >= 1")


def _svg_cells(grid: PaddedGrid, x0: int, y0: int, spec: RenderSpec,
               highlight: np.ndarray | None = None) -> list[str]:
    px = spec.cell_px
    pal = spec.palette
    parts = []
    for r in range(grid.height):
        for c in range(grid.width):
            color = pal.rgb[int(grid.cells[r, c])]
            parts.append(
                f'<rect x="{x0 + c * px}" y="{y0 + r * px}" width="{px}" height="{px}" '
                f'fill="{color}" stroke="{pal.grid_line}" stroke-width="1"/>'
            )
    if highlight is not None:
        for r in range(grid.height):
            for c in range(grid.width):
                if highlight[r, c]:
                    parts.append(
                        f'<rect x="{x0 + c * px}" y="{y0 + r * px}" width="{px}" height="{px}" '
                        f'fill="none" stroke="{pal.highlight}" stroke-width="2"/>'
                    )
    return parts


def _svg_doc(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render_single(grid: PaddedGrid, spec: RenderSpec = RenderSpec()) -> str:
    """One grid; padding cells are not drawn."""
    px = spec.cell_px
    width = grid.width * px + 2 * MARGIN
    height = grid.height * px + 2 * MARGIN
    return _svg_doc(width, height, _svg_cells(grid, MARGIN, MARGIN, spec, spec.highlight))


def render_pair(input_grid: PaddedGrid, output_grid: PaddedGrid,
                spec: RenderSpec = RenderSpec()) -> str:
    """Input and output side by side, independently sized."""
    px = spec.cell_px
    x_out = MARGIN + input_grid.width * px + PANEL_GAP
    width = x_out + output_grid.width * px + MARGIN
    height = max(input_grid.height, output_grid.height) * px + 2 * MARGIN
    body = _svg_cells(input_grid, MARGIN, MARGIN, spec)
    sep_x = MARGIN + input_grid.width * px + PANEL_GAP // 2
    body.append(
        f'<line x1="{sep_x}" y1="{MARGIN}" x2="{sep_x}" y2="{height - MARGIN}" '
        f'stroke="{spec.palette.grid_line}" stroke-width="1"/>'
    )
    body += _svg_cells(output_grid, x_out, MARGIN, spec)
    return _svg_doc(width, height, body)


def render_rl_step(before, action, after, reward: float,
                   spec: RenderSpec = RenderSpec()) -> str:
    """One transition: before/after working grids, selection outlined,
    op id and reward captioned (reward signed, two decimals)."""
    px = spec.cell_px
    b = before.working
    a = after.working
    x_after = MARGIN + b.width * px + PANEL_GAP
    width = x_after + a.width * px + MARGIN
    caption = CAPTION_H if spec.show_reward else 0
    height = max(b.height, a.height) * px + 2 * MARGIN + caption
    body = _svg_cells(b, MARGIN, MARGIN, spec, highlight=action.selection)
    arrow_x = MARGIN + b.width * px + PANEL_GAP // 2
    arrow_y = MARGIN + max(b.height, a.height) * px // 2
    body.append(
        f'<text x="{arrow_x}" y="{arrow_y}" text-anchor="middle" '
        f'font-family="monospace" font-size="12" fill="{spec.palette.grid_line}">&#8594;</text>'
    )
    body += _svg_cells(a, x_after, MARGIN, spec)
    if spec.show_reward:
        text_y = height - MARGIN
        body.append(
            f'<text x="{MARGIN}" y="{text_y}" font-family="monospace" font-size="12" '
            f'fill="#000000">op {action.op}  reward {reward:+.2f}</text>'
        )
    return _svg_doc(width, height, body)


def render_complete_task(task, spec: RenderSpec = RenderSpec()) -> str:
    """All demonstration pairs stacked, then the test inputs (no outputs)."""
    from .grids import FULL, pad_into_buffer

    px = spec.cell_px
    rows = []
    for a, b in task.demo_pairs:
        rows.append(("pair", pad_into_buffer(a, FULL), pad_into_buffer(b, FULL)))
    for a, _ in task.test_pairs:
        rows.append(("test", pad_into_buffer(a, FULL), None))

    def row_width(row):
        _, left, right = row
        w = left.width * px
        if right is not None:
            w += PANEL_GAP + right.width * px
        return w

    width = max(row_width(r) for r in rows) + 2 * MARGIN
    body = []
    y = MARGIN
    for kind, left, right in rows:
        body += _svg_cells(left, MARGIN, y, spec)
        row_h = left.height
        if right is not None:
            body += _svg_cells(right, MARGIN + left.width * px + PANEL_GAP, y, spec)
            row_h = max(row_h, right.height)
        y += row_h * px + PANEL_GAP
    height = y - PANEL_GAP + MARGIN
    return _svg_doc(width, height, body)


# Terminal rendering: two columns per cell, framed; ANSI background color
# cells with a digit-per-cell ASCII fallback.


def _term_rows(grid: PaddedGrid, palette: Palette, ansi: bool) -> list[str]:
    lines = []
    for r in range(grid.height):
        cells = []
        for c in range(grid.width):
            v = int(grid.cells[r, c])
            if ansi:
                cells.append(f"\x1b[48;5;{palette.term256[v]}m  \x1b[0m")
            else:
                cells.append(f"{v} ")
        lines.append("".join(cells))
    return lines


def _frame(lines: list[str], inner_width: int) -> str:
    top = "+" + "-" * inner_width + "+"
    framed = [top] + [f"|{line}|" for line in lines] + [top]
    return "\n".join(framed) + "\n"


def render_single_terminal(grid: PaddedGrid, spec: RenderSpec = RenderSpec(),
                           ansi: bool = True) -> str:
    return _frame(_term_rows(grid, spec.palette, ansi), grid.width * 2)


def render_pair_terminal(input_grid: PaddedGrid, output_grid: PaddedGrid,
                         spec: RenderSpec = RenderSpec(), ansi: bool = True) -> str:
    left = render_single_terminal(input_grid, spec, ansi).rstrip("\n").split("\n")
    right = render_single_terminal(output_grid, spec, ansi).rstrip("\n").split("\n")
    height = max(len(left), len(right))
    left += [" " * (input_grid.width * 2 + 2)] * (height - len(left))
    right += [""] * (height - len(right))
    return "\n".join(f"{a}  {b}".rstrip() for a, b in zip(left, right)) + "\n"


def render_rl_step_terminal(before, action, after, reward: float,
                            spec: RenderSpec = RenderSpec(), ansi: bool = True) -> str:
    panels = render_pair_terminal(before.working, after.working, spec, ansi)
    caption = f"op {action.op}  reward {reward:+.2f}\n" if spec.show_reward else ""
    return panels + caption


def render_complete_task_terminal(task, spec: RenderSpec = RenderSpec(),
                                  ansi: bool = True) -> str:
    from .grids import FULL, pad_into_buffer

    blocks = []
    for a, b in task.demo_pairs:
        blocks.append(render_pair_terminal(
            pad_into_buffer(a, FULL), pad_into_buffer(b, FULL), spec, ansi))
    for a, _ in task.test_pairs:
        blocks.append(render_single_terminal(pad_into_buffer(a, FULL), spec, ansi))
    return "\n".join(blocks)
