"""Independent checks that work on the grid directly, without any flow network."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Optional

from .errors import ContractViolation
from .grid import FREE, OBSTACLE, Cell, OccupancyGrid

_STEPS = ((-1, 0), (1, 0), (0, -1), (0, 1))


def _check_robots(grid: OccupancyGrid, robots) -> set:
    robots = set(robots)
    for cell in robots:
        if not grid.is_robot_cell(cell):
            raise ContractViolation(f"robot at {cell} is not on a free interior cell")
    return robots


def _walk(grid: OccupancyGrid, blocked: set):
    """BFS from every free border cell; returns the parent map of reached cells."""
    h, w = grid.shape
    cells = grid.cells
    parent = {}
    queue = deque()
    for c in range(w):
        for r in (0, h - 1):
            if cells[r, c] == FREE and (r, c) not in blocked and (r, c) not in parent:
                parent[(r, c)] = None
                queue.append((r, c))
    for r in range(1, h - 1):
        for c in (0, w - 1):
            if cells[r, c] == FREE and (r, c) not in blocked and (r, c) not in parent:
                parent[(r, c)] = None
                queue.append((r, c))
    while queue:
        r, c = queue.popleft()
        for dr, dc in _STEPS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < h and 0 <= nc < w) or (nr, nc) in parent:
                continue
            if cells[nr, nc] == OBSTACLE or (nr, nc) in blocked:
                continue
            parent[(nr, nc)] = (r, c)
            queue.append((nr, nc))
    return parent


def find_leak(grid: OccupancyGrid, robots: Iterable[Cell] = ()) -> Optional[list]:
    """Shortest border-to-target path avoiding ``robots``, or None if separated."""
    blocked = _check_robots(grid, robots)
    parent = _walk(grid, blocked)
    reached = [cell for cell in parent if grid.cells[cell] >= 0]
    if not reached:
        return None
    cell = min(reached)
    path = []
    while cell is not None:
        path.append(cell)
        cell = parent[cell]
    return path[::-1]


def verify_separation(grid: OccupancyGrid, robots: Iterable[Cell] = ()) -> bool:
    """True iff no 4-connected path leads from a free border cell to any target.

    Robots block their cells; targets themselves may be walked through.
    """
    return find_leak(grid, robots) is None


def brute_force_min_cut(grid: OccupancyGrid, k_max: int = 4) -> Optional[int]:
    """Smallest number of robots that separates every target, searching up to ``k_max``.

    Exhaustive bounded search: any separator must contain a free interior cell
    of every remaining leak path, so it branches on the cells of the current
    shortest leak. Returns None if no separator of size <= ``k_max`` exists.
    """
    for k in range(k_max + 1):
        if _separable(grid, set(), k):
            return k
    return None


def _separable(grid: OccupancyGrid, chosen: set, budget: int) -> bool:
    path = find_leak(grid, chosen)
    if path is None:
        return True
    if budget == 0:
        return False
    for cell in path:
        if grid.is_robot_cell(cell):
            chosen.add(cell)
            found = _separable(grid, chosen, budget - 1)
            chosen.discard(cell)
            if found:
                return True
    return False


def brute_force_min_cut_subsets(grid: OccupancyGrid, k_max: int = 3) -> Optional[int]:
    """Same answer as :func:`brute_force_min_cut` by plain enumeration of k-subsets.

    Only usable on tiny grids; exists to cross-check the bounded search.
    """
    from itertools import combinations

    candidates = [(int(r), int(c)) for r, c in zip(*grid.interior_free_mask.nonzero())]
    for k in range(k_max + 1):
        for subset in combinations(candidates, k):
            if verify_separation(grid, subset):
                return k
    return None
