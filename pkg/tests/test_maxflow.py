import dataclasses

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cordon import maxflow
from cordon.errors import ContractViolation
from cordon.flownet import FlowNetwork, attach_merged_sink, attach_single_sink, build_base_network
from cordon.grid import GenSpec, OccupancyGrid, generate_environment
from cordon.maxflow import (
    FlowCheckError,
    VARIANT,
    extract_min_cut,
    max_flow,
    min_vertex_cut,
)
from cordon.oracle import brute_force_min_cut, find_leak, verify_separation
from strategies import small_grids


def raw_network(n, arcs, s, t):
    tail, head, cap = (np.array(x, dtype=np.int64) for x in zip(*arcs)) if arcs else (
        np.zeros(0, np.int64),) * 3
    return FlowNetwork(n_nodes=n, tail=tail, head=head, cap=cap, source=s, sink=t,
                       infinite=10**9, shape=(0, 0), cell_index=np.zeros(0, np.int64), n_internal=0)


def nx_value(net):
    g = nx.DiGraph()
    g.add_nodes_from(range(net.n_nodes))
    for t, h, c in zip(net.tail.tolist(), net.head.tolist(), net.cap.tolist()):
        if g.has_edge(t, h):
            g[t][h]["capacity"] += c
        else:
            g.add_edge(t, h, capacity=c)
    return nx.maximum_flow_value(g, net.source, net.sink)


@pytest.mark.parametrize("reverse", [True, False])
def test_two_nodes(reverse):
    state = max_flow(raw_network(2, [(0, 1, 5)], 0, 1), reverse=reverse)
    assert state.value == 5
    assert state.flow.tolist() == [5]


def test_unreachable_sink():
    assert max_flow(raw_network(3, [(0, 1, 4)], 0, 2)).value == 0


def test_no_sink_is_rejected():
    with pytest.raises(ContractViolation):
        max_flow(build_base_network(OccupancyGrid.empty(4, 4)))


def test_malformed_network_rejected():
    with pytest.raises(ContractViolation):
        max_flow(raw_network(2, [(0, 5, 1)], 0, 1))
    with pytest.raises(ContractViolation):
        max_flow(raw_network(2, [(0, 1, -1)], 0, 1))


arc_lists = st.integers(2, 9).flatmap(lambda n: st.tuples(
    st.just(n),
    st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), st.integers(0, 20)), max_size=30),
))


@settings(max_examples=200, deadline=None)
@given(arc_lists, st.booleans())
def test_generic_networks_match_networkx(case, reverse):
    n, arcs = case
    arcs = [a for a in arcs if a[0] != a[1]]
    net = raw_network(n, arcs, 0, n - 1)
    state = max_flow(net, reverse=reverse)
    assert state.value == nx_value(net)


@settings(max_examples=100, deadline=None)
@given(small_grids(max_side=10, max_targets=3))
def test_grid_networks_match_networkx_both_orientations(g):
    net = attach_merged_sink(build_base_network(g), g)
    fwd, rev = max_flow(net, reverse=False), max_flow(net, reverse=True)
    assert fwd.value == rev.value == nx_value(net)
    a, b = extract_min_cut(net, fwd), extract_min_cut(net, rev)
    # the canonical cut is the minimal source side, so both orientations agree
    assert a.cells == b.cells and np.array_equal(a.source_side, b.source_side)


@settings(max_examples=100, deadline=None)
@given(small_grids(max_side=10, max_targets=3))
def test_cut_separates_and_is_minimal(g):
    cut = min_vertex_cut(g)
    if not cut.feasible:
        assert cut.cells == frozenset()
        assert cut.flow_value >= build_base_network(g).infinite
        return
    assert cut.value == cut.flow_value == len(cut.cells)
    assert verify_separation(g, cut.cells)
    for cell in cut.cells:
        assert not verify_separation(g, cut.cells - {cell})


def test_center_of_empty_grid():
    g = OccupancyGrid.from_rows(["." * 10] * 5 + ["....A....."] + ["." * 10] * 4)
    cut = min_vertex_cut(g)
    assert cut.value == 4 and verify_separation(g, cut.cells)


def test_pocket_mouth_is_unique_cut():
    g = OccupancyGrid.from_rows([
        ".......",
        ".#####.",
        ".#.A.#.",
        ".#...#.",
        ".##.##.",
        ".......",
    ])
    cut = min_vertex_cut(g)
    assert cut.cells == {(4, 3)}
    assert brute_force_min_cut(g) == 1


def test_border_adjacent_target_infeasible():
    cut = min_vertex_cut(OccupancyGrid.from_rows([".....", ".A...", ".....", "....."]))
    assert not cut.feasible and cut.value is None


def test_single_target_selector():
    g = OccupancyGrid.from_rows(["#####.#", "#.A.#B#", "#...###", "##.####", "##.####"])
    assert min_vertex_cut(g, 0).cells == {(3, 2)}
    assert min_vertex_cut(g, 1).value is None
    assert min_vertex_cut(g, "all").value is None


@pytest.mark.parametrize("seed", range(12))
def test_random_single_target_matches_brute_force(seed):
    g = generate_environment(GenSpec(kind="open", width=20, height=20, obstacles=14, targets=1,
                                     seed=seed, margin=2))
    cut = min_vertex_cut(g)
    bf = brute_force_min_cut(g, k_max=4)
    if bf is None:
        assert cut.value is None or cut.value > 4
    else:
        assert cut.value == bf


def test_solver_deterministic():
    g = generate_environment(GenSpec(kind="closed", width=40, height=40, obstacles=60, targets=8, seed=2))
    net = attach_merged_sink(build_base_network(g), g)
    a, b = max_flow(net), max_flow(net)
    assert a.value == b.value and a.counters == b.counters
    assert extract_min_cut(net, a).cells == extract_min_cut(net, b).cells


def test_counters_and_variant():
    g = OccupancyGrid.from_rows(["." * 8] * 3 + ["...A...."] + ["." * 8] * 4)
    state = max_flow(attach_single_sink(build_base_network(g), g, 0))
    assert set(state.counters) == {"pushes", "relabels", "gaps", "global_relabels"}
    assert state.counters["pushes"] > 0
    assert "highest-label" in VARIANT


def test_non_maximal_flow_detected():
    g = OccupancyGrid.from_rows(["." * 6] * 2 + ["..A..."] + ["." * 6] * 3)
    net = attach_merged_sink(build_base_network(g), g)
    state = max_flow(net)
    first, head, _, resid, _, _ = maxflow._residual_csr(net.n_nodes, net.tail, net.head, net.cap)
    empty = dataclasses.replace(state, first=first, head=head, resid=resid)
    with pytest.raises(ContractViolation):
        extract_min_cut(net, empty)


def test_checked_mode_catches_bad_flow():
    g = OccupancyGrid.from_rows(["." * 6] * 2 + ["..A..."] + ["." * 6] * 3)
    net = attach_merged_sink(build_base_network(g), g)
    state = max_flow(net)
    saved = dict(maxflow.check_stats)
    try:
        bad = state.flow.copy()
        bad[0] += 1
        with pytest.raises(FlowCheckError):
            maxflow._check_flow(net, dataclasses.replace(state, flow=bad))
        with pytest.raises(FlowCheckError):
            extract_min_cut(net, dataclasses.replace(state, value=state.value + 1))
    finally:
        # the deliberate violations above must not count against the suite
        maxflow.check_stats.update(saved)


def test_checked_toggle():
    previous = maxflow.set_checked(False)
    try:
        assert not maxflow.is_checked()
    finally:
        maxflow.set_checked(previous)
    assert maxflow.is_checked()


def test_leak_path_is_a_real_path():
    g = OccupancyGrid.from_rows(["......", "......", "..A...", "......", "......"])
    path = find_leak(g, [(1, 2), (2, 1)])
    assert path[0] in set(g.border_cells()) and g[path[-1]] == 0
    for a, b in zip(path, path[1:]):
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
