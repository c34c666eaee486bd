"""SVG and ASCII renderings of a map with an optional robot placement."""

from __future__ import annotations

from typing import Iterable
from xml.sax.saxutils import escape

from .errors import ContractViolation
from .grid import OBSTACLE, Cell, OccupancyGrid
from .mapio import format_map

FILLS = {
    "free": "#ffffff",
    "obstacle": "#3b3b3b",
    "border": "#f3d9a4",
    "target": "#2e7d32",
    "robot": "#c62828",
}

LEGEND = (
    ("free", "Free"),
    ("border", "Border entry"),
    ("obstacle", "Obstacle"),
    ("target", "Target"),
    ("robot", "Robot"),
)


def _check(grid: OccupancyGrid, robots) -> set:
    robots = set(robots)
    for cell in robots:
        if not grid.in_bounds(cell):
            raise ContractViolation(f"robot {cell} outside {grid.width}x{grid.height} map")
    return robots


def render_ascii(grid: OccupancyGrid, robots: Iterable[Cell] = ()) -> str:
    """Map text with robots drawn as ``R``; parses back with :func:`cordon.mapio.parse_map`."""
    return format_map(grid, _check(grid, robots), overlay=True)


def render_svg(grid: OccupancyGrid, robots: Iterable[Cell] = (), cell: int = 10, title: str = "") -> str:
    robots = _check(grid, robots)
    w, h = grid.width * cell, grid.height * cell
    legend_h = 2 * cell + 16
    total_h = h + legend_h
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{total_h}" '
        f'viewBox="0 0 {w} {total_h}">'
    ]
    if title:
        parts.append(f"<title>{escape(title)}</title>")
    parts.append(f'<rect class="free" x="0" y="0" width="{w}" height="{h}" fill="{FILLS["free"]}"/>')
    border = grid.border_mask
    for r in range(grid.height):
        for c in range(grid.width):
            state = int(grid.cells[r, c])
            if (r, c) in robots:
                kind = "robot"
            elif state >= 0:
                kind = "target"
            elif state == OBSTACLE:
                kind = "obstacle"
            elif border[r, c]:
                kind = "border"
            else:
                continue
            label = f' data-target="{state}"' if kind == "target" else ""
            parts.append(
                f'<rect class="{kind}"{label} x="{c * cell}" y="{r * cell}" '
                f'width="{cell}" height="{cell}" fill="{FILLS[kind]}"/>'
            )
    parts.append(f'<g class="legend" transform="translate(0,{h + 4})" font-size="{max(cell, 10)}">')
    x = 2
    for kind, text in LEGEND:
        parts.append(f'<rect x="{x}" y="2" width="{cell}" height="{cell}" fill="{FILLS[kind]}" stroke="#000"/>')
        parts.append(f'<text x="{x + cell + 3}" y="{cell + 1}">{text}</text>')
        x += cell + 8 * len(text) + 12
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
