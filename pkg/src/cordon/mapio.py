"""Text format for maps and robot placements.

A map file is a header line ``cordon-map v1 <width> <height> <m>`` followed by
``height`` rows of ``width`` characters:

* ``.`` free, ``#`` obstacle
* ``A``-``Z`` (skipping ``R``) then ``a``-``z`` for target ids 0-50
* ``*`` for a target with id >= 51; its id comes from a companion index file
  (``<map>.idx``) with one ``targetId,row,col`` line per ``*`` cell
* ``R`` free cell occupied by a robot (only written by the ASCII renderer)

A placement file is a map file with ``R <row> <col>`` lines appended, one per
robot, sorted. The map part may be omitted, leaving only the ``R`` lines.
"""

from __future__ import annotations

import os
import string
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import MapFormatError
from .grid import FREE, OBSTACLE, Cell, OccupancyGrid

MAGIC = "cordon-map"
VERSION = "v1"
ROBOT_CHAR = "R"
TARGET_CHARS = string.ascii_uppercase.replace(ROBOT_CHAR, "") + string.ascii_lowercase
OVERFLOW_CHAR = "*"
INDEX_SUFFIX = ".idx"


def char_to_state(ch: str) -> int:
    if ch == ".":
        return FREE
    if ch == "#":
        return OBSTACLE
    i = TARGET_CHARS.find(ch)
    if i < 0 or len(ch) != 1:
        raise MapFormatError(f"unknown map character {ch!r}")
    return i


def state_to_char(state: int) -> str:
    if state == FREE:
        return "."
    if state == OBSTACLE:
        return "#"
    if state < len(TARGET_CHARS):
        return TARGET_CHARS[state]
    return OVERFLOW_CHAR


@dataclass(frozen=True)
class MapDocument:
    """Parsed map/placement text: the grid (if present) and robot cells."""

    grid: OccupancyGrid | None
    robots: frozenset


def format_map(grid: OccupancyGrid, robots: Iterable[Cell] = (), overlay: bool = False) -> str:
    """Serialise ``grid``; robots become ``R`` lines, or ``R`` cells when ``overlay``."""
    robots = sorted(set(robots))
    lines = [f"{MAGIC} {VERSION} {grid.width} {grid.height} {grid.m}"]
    rows = [[state_to_char(int(s)) for s in row] for row in grid.cells.tolist()]
    if overlay:
        for r, c in robots:
            rows[r][c] = ROBOT_CHAR
    lines.extend("".join(row) for row in rows)
    if not overlay:
        lines.extend(format_robot_lines(robots))
    return "\n".join(lines) + "\n"


def format_robot_lines(robots: Iterable[Cell]) -> list[str]:
    return [f"{ROBOT_CHAR} {r} {c}" for r, c in sorted(set(robots))]


def format_target_index(grid: OccupancyGrid) -> str | None:
    """Companion index text for targets beyond the letter range, or None when not needed."""
    if grid.m <= len(TARGET_CHARS):
        return None
    rows, cols = np.nonzero(grid.cells >= len(TARGET_CHARS))
    entries = sorted((int(grid.cells[r, c]), int(r), int(c)) for r, c in zip(rows, cols))
    return "".join(f"{t},{r},{c}\n" for t, r, c in entries)


def parse_target_index(text: str) -> dict[Cell, int]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            t, r, c = (int(x) for x in line.split(","))
        except ValueError:
            raise MapFormatError(f"bad index entry {line!r}", lineno) from None
        out[(r, c)] = t
    return out


def parse_map(text: str, index_text: str | None = None) -> MapDocument:
    lines = text.splitlines()
    pos = 0
    grid = None
    robots: set[Cell] = set()
    if lines and lines[0].startswith(MAGIC):
        grid, overlay_robots = _parse_grid(lines, index_text)
        robots |= overlay_robots
        pos = grid.height + 1
    for lineno in range(pos, len(lines)):
        line = lines[lineno]
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != ROBOT_CHAR:
            raise MapFormatError(f"expected 'R row col', got {line!r}", lineno + 1)
        try:
            cell = (int(parts[1]), int(parts[2]))
        except ValueError:
            raise MapFormatError(f"bad robot coordinates {line!r}", lineno + 1) from None
        robots.add(cell)
    return MapDocument(grid, frozenset(robots))


def _parse_grid(lines, index_text):
    header = lines[0].split()
    if len(header) != 5 or header[0] != MAGIC or header[1] != VERSION:
        raise MapFormatError(f"bad header {lines[0]!r}", 1)
    try:
        width, height, m = (int(x) for x in header[2:])
    except ValueError:
        raise MapFormatError(f"bad header {lines[0]!r}", 1) from None
    if len(lines) < height + 1:
        raise MapFormatError(f"expected {height} rows, found {len(lines) - 1}", len(lines))
    index = parse_target_index(index_text) if index_text else {}
    cells = np.empty((height, width), dtype=np.int16)
    robots = set()
    for r in range(height):
        row = lines[r + 1]
        if len(row) != width:
            raise MapFormatError(f"row has {len(row)} cells, expected {width}", r + 2)
        for c, ch in enumerate(row):
            if ch == ROBOT_CHAR:
                robots.add((r, c))
                cells[r, c] = FREE
            elif ch == OVERFLOW_CHAR:
                if (r, c) not in index:
                    raise MapFormatError(f"'*' at ({r}, {c}) has no index entry", r + 2)
                cells[r, c] = index[(r, c)]
            else:
                try:
                    cells[r, c] = char_to_state(ch)
                except MapFormatError as exc:
                    raise MapFormatError(str(exc), r + 2) from None
    try:
        grid = OccupancyGrid(cells)
    except ValueError as exc:
        raise MapFormatError(str(exc)) from None
    if grid.m != m:
        raise MapFormatError(f"header declares {m} targets, map has {grid.m}", 1)
    return grid, robots


def read_map(path) -> MapDocument:
    path = os.fspath(path)
    with open(path, encoding="ascii") as f:
        text = f.read()
    index_text = None
    if os.path.exists(path + INDEX_SUFFIX):
        with open(path + INDEX_SUFFIX, encoding="ascii") as f:
            index_text = f.read()
    return parse_map(text, index_text)


def write_map(path, grid: OccupancyGrid, robots: Iterable[Cell] = ()):
    path = os.fspath(path)
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(format_map(grid, robots))
    index = format_target_index(grid)
    if index is not None:
        with open(path + INDEX_SUFFIX, "w", encoding="ascii", newline="\n") as f:
            f.write(index)
    elif os.path.exists(path + INDEX_SUFFIX):
        os.remove(path + INDEX_SUFFIX)
