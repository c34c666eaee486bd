"""Robot placement: one cut per target (individual) or one merged cut (holistic)."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

from .errors import ContractViolation
from .flownet import attach_merged_sink, attach_single_sink, build_base_network
from .grid import OccupancyGrid
from .maxflow import extract_min_cut, max_flow


class Approach(str, Enum):
    INDIVIDUAL = "individual"
    HOLISTIC = "holistic"


@dataclass(frozen=True)
class Placement:
    """Robot cells chosen by one approach.

    ``robots`` is a set, so a cell shared by several per-target cuts is
    counted once. Times are wall-clock seconds covering network construction
    and the solve.
    """

    approach: Approach
    robots: frozenset
    feasible: bool
    solve_time: float
    m: int
    per_target_feasible: Tuple[bool, ...] = ()
    per_target_times: Tuple[float, ...] = ()
    flow_values: Tuple[int, ...] = field(default=(), repr=False)

    @property
    def count(self) -> int:
        return len(self.robots)


def _cut_for_target(grid: OccupancyGrid, target_id: int):
    start = time.perf_counter()
    net = attach_single_sink(build_base_network(grid), grid, target_id)
    cut = extract_min_cut(net, max_flow(net))
    return cut, time.perf_counter() - start


def solve_individual(grid: OccupancyGrid, workers: int = 1) -> Placement:
    """Cut each target away from the border on its own and union the robot cells.

    Infeasible targets (reachable from the border without crossing a free
    interior cell) contribute no robots and make the placement infeasible.
    With ``workers > 1`` the per-target solves run on a thread pool.
    """
    if grid.m < 1:
        raise ContractViolation("grid has no targets")
    start = time.perf_counter()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda i: _cut_for_target(grid, i), range(grid.m)))
    else:
        results = [_cut_for_target(grid, i) for i in range(grid.m)]
    total = time.perf_counter() - start
    robots = set()
    for cut, _ in results:
        robots |= cut.cells
    feasible = tuple(cut.feasible for cut, _ in results)
    return Placement(
        approach=Approach.INDIVIDUAL,
        robots=frozenset(robots),
        feasible=all(feasible),
        solve_time=total,
        m=grid.m,
        per_target_feasible=feasible,
        per_target_times=tuple(t for _, t in results),
        flow_values=tuple(cut.flow_value for cut, _ in results),
    )


def solve_holistic(grid: OccupancyGrid) -> Placement:
    """One cut between the border and a sink that every target feeds."""
    if grid.m < 1:
        raise ContractViolation("grid has no targets")
    start = time.perf_counter()
    net = attach_merged_sink(build_base_network(grid), grid)
    cut = extract_min_cut(net, max_flow(net))
    elapsed = time.perf_counter() - start
    return Placement(
        approach=Approach.HOLISTIC,
        robots=cut.cells,
        feasible=cut.feasible,
        solve_time=elapsed,
        m=grid.m,
        flow_values=(cut.flow_value,),
    )


def parallel_individual_time_estimate(p: Placement) -> float:
    """Individual time if every per-target solve ran at once: total time / m."""
    if p.approach is not Approach.INDIVIDUAL:
        raise ContractViolation("parallel estimate applies to individual placements only")
    return p.solve_time / p.m


def parallel_individual_time_bound(p: Placement) -> float:
    """Slowest single per-target solve; a tighter bound than dividing by m."""
    if p.approach is not Approach.INDIVIDUAL:
        raise ContractViolation("parallel bound applies to individual placements only")
    return max(p.per_target_times)
