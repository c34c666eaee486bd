"""Occupancy grids and the seeded generators for open and closed environments.

Cells are stored as a small signed integer array of shape ``(height, width)``:
``FREE`` (-1), ``OBSTACLE`` (-2), or a target id ``>= 0``. Coordinates are
``(row, col)`` tuples throughout the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from .errors import ContractViolation, GenerationFailedError, InvalidSpecError

Cell = Tuple[int, int]

MIN_SIDE = 3


class CellState(IntEnum):
    FREE = -1
    OBSTACLE = -2


FREE = int(CellState.FREE)
OBSTACLE = int(CellState.OBSTACLE)


class EnvKind(str, Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Immutable occupancy grid.

    Parameters
    ----------
    cells : array_like of int, shape (height, width)
        ``FREE``, ``OBSTACLE`` or a target id. Target ids must form the
        contiguous range ``0..m-1``.
    """

    cells: np.ndarray
    m: int = field(init=False)

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int16, copy=True)
        if cells.ndim != 2:
            raise InvalidSpecError(f"grid must be 2-D, got shape {cells.shape}")
        h, w = cells.shape
        if w < MIN_SIDE or h < MIN_SIDE:
            raise InvalidSpecError(f"grid must be at least {MIN_SIDE}x{MIN_SIDE}, got {w}x{h}")
        if np.any(cells < OBSTACLE):
            raise InvalidSpecError("unknown cell state in grid")
        ids = np.unique(cells[cells >= 0])
        m = int(ids.size)
        if m and (ids[0] != 0 or ids[-1] != m - 1):
            raise InvalidSpecError(f"target ids must be contiguous from 0, got {ids.tolist()}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "m", m)

    @classmethod
    def empty(cls, width: int, height: int) -> "OccupancyGrid":
        return cls(np.full((height, width), FREE, dtype=np.int16))

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "OccupancyGrid":
        """Build a grid from ``'.'``/``'#'``/letter rows (letters as in the map format)."""
        from .mapio import char_to_state

        cells = [[char_to_state(ch) for ch in row] for row in rows]
        if len({len(r) for r in cells}) != 1:
            raise InvalidSpecError("rows have unequal length")
        return cls(np.array(cells, dtype=np.int16))

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.cells.shape

    def __getitem__(self, cell: Cell) -> int:
        return int(self.cells[cell])

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return self.cells.shape == other.cells.shape and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.cells.shape, self.cells.tobytes()))

    def __repr__(self):
        return f"OccupancyGrid({self.width}x{self.height}, m={self.m}, free={int(self.free_mask.sum())})"

    def in_bounds(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < self.height and 0 <= c < self.width

    @property
    def free_mask(self) -> np.ndarray:
        return self.cells == FREE

    @property
    def obstacle_mask(self) -> np.ndarray:
        return self.cells == OBSTACLE

    @property
    def target_mask(self) -> np.ndarray:
        return self.cells >= 0

    @property
    def ring_mask(self) -> np.ndarray:
        """Cells on the outermost ring, whatever their state."""
        ring = np.ones(self.shape, dtype=bool)
        ring[1:-1, 1:-1] = False
        return ring

    @property
    def border_mask(self) -> np.ndarray:
        """Free cells on the outermost ring: where intruders enter."""
        return self.ring_mask & self.free_mask

    @property
    def interior_free_mask(self) -> np.ndarray:
        """Cells a robot may occupy."""
        return self.free_mask & ~self.ring_mask

    def border_cells(self) -> list[Cell]:
        return _cells_of(self.border_mask)

    def target_cells(self, target_id: int | None = None) -> list[Cell]:
        if target_id is None:
            return _cells_of(self.target_mask)
        if not 0 <= target_id < self.m:
            raise ContractViolation(f"unknown target id {target_id} (m={self.m})")
        return _cells_of(self.cells == target_id)

    def is_robot_cell(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and bool(self.interior_free_mask[cell])

    def replace(self, updates: dict) -> "OccupancyGrid":
        """Return a copy with ``{cell: state}`` updates applied."""
        cells = self.cells.copy()
        for cell, state in updates.items():
            cells[cell] = state
        return OccupancyGrid(cells)


def _cells_of(mask: np.ndarray) -> list[Cell]:
    rows, cols = np.nonzero(mask)
    return list(zip(rows.tolist(), cols.tolist()))


def neighbors(grid: OccupancyGrid, cell: Cell) -> list[Cell]:
    """4-connected in-bounds neighbours of ``cell`` (any state), in up/down/left/right order."""
    if not grid.in_bounds(cell):
        raise ContractViolation(f"cell {cell} outside {grid.width}x{grid.height} grid")
    r, c = cell
    out = []
    for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
        if 0 <= nr < grid.height and 0 <= nc < grid.width:
            out.append((nr, nc))
    return out


# ---------------------------------------------------------------------------
# seeds

def derive_seed(master_seed: int, *keys: int) -> int:
    """Split ``master_seed`` into an independent 64-bit seed for ``keys``.

    This is numpy's ``SeedSequence(master_seed, spawn_key=keys)``; the first
    64-bit word of its state is the derived seed. Stable across platforms.
    """
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


# ---------------------------------------------------------------------------
# generators

@dataclass(frozen=True)
class GenSpec:
    """Parameters for one random environment.

    ``obstacles`` is a rectangle count for open environments and a count of
    blocked street intersections for closed ones. ``targets`` is either a fixed
    count or an inclusive ``(lo, hi)`` range sampled per environment.
    """

    kind: EnvKind
    width: int
    height: int
    obstacles: int = 0
    targets: Union[int, Tuple[int, int]] = 1
    block_size: int = 3
    seed: int = 0
    rect_min: int = 2
    rect_max: int = 10
    margin: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", EnvKind(self.kind))
        if isinstance(self.targets, Iterable):
            lo, hi = self.targets
            object.__setattr__(self, "targets", (int(lo), int(hi)))
        self.validate()

    @property
    def target_range(self) -> Tuple[int, int]:
        if isinstance(self.targets, tuple):
            return self.targets
        return (self.targets, self.targets)

    def validate(self):
        if self.width < MIN_SIDE or self.height < MIN_SIDE:
            raise InvalidSpecError(f"environment must be at least {MIN_SIDE}x{MIN_SIDE}")
        if self.obstacles < 0:
            raise InvalidSpecError("obstacle count must be >= 0")
        lo, hi = self.target_range
        if lo < 1 or hi < lo:
            raise InvalidSpecError(f"bad target count {self.targets!r}")
        if self.block_size < 1:
            raise InvalidSpecError("block size must be >= 1")
        if not 1 <= self.rect_min <= self.rect_max:
            raise InvalidSpecError("need 1 <= rect_min <= rect_max")
        if self.margin < 1:
            raise InvalidSpecError("target margin must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidSpecError("seed must be a 64-bit unsigned integer")


def generate_open(spec: GenSpec, rng: np.random.Generator | None = None) -> OccupancyGrid:
    """Empty map with ``spec.obstacles`` random axis-aligned rectangles stamped on.

    Rectangle sides are uniform in ``[rect_min, rect_max]`` (clipped to the map)
    and each rectangle lies fully inside the map. Rectangles may overlap.
    """
    if spec.kind is not EnvKind.OPEN:
        raise InvalidSpecError("generate_open needs an open spec")
    rng = make_rng(spec.seed) if rng is None else rng
    cells = np.full((spec.height, spec.width), FREE, dtype=np.int16)
    for _ in range(spec.obstacles):
        w = min(int(rng.integers(spec.rect_min, spec.rect_max + 1)), spec.width)
        h = min(int(rng.integers(spec.rect_min, spec.rect_max + 1)), spec.height)
        col = int(rng.integers(0, spec.width - w + 1))
        row = int(rng.integers(0, spec.height - h + 1))
        cells[row:row + h, col:col + w] = OBSTACLE
    return OccupancyGrid(cells)


def street_lines(n: int, block_size: int) -> list[int]:
    """Row (or column) indices of streets: every ``block_size + 1`` cells, plus the far edge."""
    lines = list(range(0, n, block_size + 1))
    if lines[-1] != n - 1:
        lines.append(n - 1)
    return lines


def intersections(width: int, height: int, block_size: int) -> list[Cell]:
    """Street crossings of the closed layout, row-major."""
    rows = street_lines(height, block_size)
    cols = street_lines(width, block_size)
    return [(r, c) for r in rows for c in cols]


def generate_closed(spec: GenSpec, rng: np.random.Generator | None = None) -> OccupancyGrid:
    """City layout with ``spec.obstacles`` distinct intersections blocked.

    Square blocks of side ``block_size`` are separated by 1-cell streets, with
    streets along all four edges (the last block in each direction may be
    narrower). When more intersections are requested than exist, every one is
    blocked; see :func:`closed_saturated`.
    """
    if spec.kind is not EnvKind.CLOSED:
        raise InvalidSpecError("generate_closed needs a closed spec")
    rng = make_rng(spec.seed) if rng is None else rng
    cells = np.full((spec.height, spec.width), OBSTACLE, dtype=np.int16)
    rows = street_lines(spec.height, spec.block_size)
    cols = street_lines(spec.width, spec.block_size)
    cells[rows, :] = FREE
    cells[:, cols] = FREE
    crossings = intersections(spec.width, spec.height, spec.block_size)
    k = min(spec.obstacles, len(crossings))
    if k:
        picked = rng.choice(len(crossings), size=k, replace=False)
        for i in np.sort(picked):
            cells[crossings[i]] = OBSTACLE
    return OccupancyGrid(cells)


def closed_saturated(spec: GenSpec) -> bool:
    return spec.kind is EnvKind.CLOSED and spec.obstacles > len(
        intersections(spec.width, spec.height, spec.block_size))


def place_targets(grid: OccupancyGrid, count: int, rng: np.random.Generator,
                  margin: int = 1) -> OccupancyGrid:
    """Turn ``count`` random free cells into single-cell targets.

    Candidates are Free cells at least ``margin`` cells from the edge (``margin=1``
    excludes just the border ring). New ids continue from ``grid.m`` in draw order.

    Raises
    ------
    GenerationFailedError
        If there are fewer than ``count`` candidate cells.
    """
    if count < 0:
        raise ContractViolation("target count must be >= 0")
    window = np.zeros(grid.shape, dtype=bool)
    window[margin:grid.height - margin, margin:grid.width - margin] = True
    candidates = np.flatnonzero((grid.free_mask & window).ravel())
    if candidates.size < count:
        raise GenerationFailedError(
            f"need {count} free interior cells for targets, only {candidates.size} available")
    chosen = candidates[rng.choice(candidates.size, size=count, replace=False)]
    cells = grid.cells.copy().ravel()
    cells[chosen] = grid.m + np.arange(count, dtype=np.int16)
    return OccupancyGrid(cells.reshape(grid.shape))


def generate_environment(spec: GenSpec) -> OccupancyGrid:
    """Obstacles, then a target count drawn from ``spec.targets``, then targets; one RNG stream."""
    rng = make_rng(spec.seed)
    if spec.kind is EnvKind.OPEN:
        grid = generate_open(spec, rng)
    else:
        grid = generate_closed(spec, rng)
    lo, hi = spec.target_range
    count = int(rng.integers(lo, hi + 1))
    return place_targets(grid, count, rng, margin=spec.margin)
