"""Preflow-push maximum flow and minimum-cut extraction.

The solver is the highest-label variant with the gap heuristic and a global
relabel (exact distance labels by reverse BFS) every ``n_nodes`` discharges.
It is a single-phase implementation: labels run up to ``2n - 1`` so excess that
cannot reach the sink drains back to the source, and on return the preflow is
a proper flow.

Set ``CORDON_CHECKED=1`` (or call :func:`set_checked`) to verify capacity,
conservation and flow/cut duality after every solve.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Union

import numba
import numpy as np

from .errors import ContractViolation, CordonError
from .flownet import FlowNetwork, attach_merged_sink, attach_single_sink, build_base_network
from .grid import OccupancyGrid

VARIANT = "highest-label+gap+global/sink-side"

_checked = os.environ.get("CORDON_CHECKED", "") not in ("", "0")
check_stats = {"solves": 0, "duality_checks": 0, "violations": 0}


class FlowCheckError(CordonError, AssertionError):
    """A checked-mode invariant failed after a solve."""


def set_checked(enabled: bool) -> bool:
    """Toggle checked mode; returns the previous setting."""
    global _checked
    previous = _checked
    _checked = bool(enabled)
    return previous


def is_checked() -> bool:
    return _checked


# ---------------------------------------------------------------------------
# compiled kernels

@numba.njit(cache=True, nogil=True)
def _insert(node, level, heads, nxt, prv):
    h = heads[level]
    nxt[node] = h
    prv[node] = -1
    if h >= 0:
        prv[h] = node
    heads[level] = node


@numba.njit(cache=True, nogil=True)
def _remove(node, level, heads, nxt, prv):
    p = prv[node]
    q = nxt[node]
    if p >= 0:
        nxt[p] = q
    else:
        heads[level] = q
    if q >= 0:
        prv[q] = p
    nxt[node] = -1
    prv[node] = -1


@numba.njit(cache=True, nogil=True)
def _global_relabel(n, first, head, rev, resid, s, t, height, excess, cur,
                    act, ina, nxt, prv, state, queue):
    dead = 2 * n
    for v in range(n):
        height[v] = dead
    # exact distance to the sink, then (offset by n) to the source
    for root, base in ((t, 0), (s, n)):
        if height[root] < dead:
            continue
        height[root] = base
        qh = 0
        qt = 0
        queue[qt] = root
        qt += 1
        while qh < qt:
            v = queue[qh]
            qh += 1
            for a in range(first[v], first[v + 1]):
                w = head[a]
                if height[w] == dead and w != s and resid[rev[a]] > 0:
                    height[w] = height[v] + 1
                    queue[qt] = w
                    qt += 1
    for lv in range(act.size):
        act[lv] = -1
        ina[lv] = -1
    amax = -1
    dmax = -1
    for v in range(n):
        state[v] = -1
        nxt[v] = -1
        prv[v] = -1
        cur[v] = first[v]
        if v == s or v == t or height[v] >= dead:
            continue
        hv = height[v]
        if excess[v] > 0:
            _insert(v, hv, act, nxt, prv)
            state[v] = 1
            if hv > amax:
                amax = hv
        else:
            _insert(v, hv, ina, nxt, prv)
            state[v] = 0
        if hv < n and hv > dmax:
            dmax = hv
    return amax, dmax


@numba.njit(cache=True, nogil=True)
def _push_relabel(n, first, head, rev, resid, s, t):
    """Run preflow-push in place on ``resid``; returns (excess, height, counters)."""
    dead = 2 * n
    excess = np.zeros(n, dtype=np.int64)
    height = np.zeros(n, dtype=np.int64)
    cur = np.empty(n, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    prv = np.full(n, -1, dtype=np.int64)
    state = np.full(n, -1, dtype=np.int8)
    act = np.full(dead + 1, -1, dtype=np.int64)
    ina = np.full(dead + 1, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    counters = np.zeros(4, dtype=np.int64)  # pushes, relabels, gaps, global relabels

    for a in range(first[s], first[s + 1]):
        d = resid[a]
        if d > 0 and head[a] != s:
            resid[a] -= d
            resid[rev[a]] += d
            excess[head[a]] += d
            excess[s] -= d

    # phase 1 discharges only labels below n (enough to fix the cut); phase 2
    # then drains the remaining excess back to the source
    top = n - 1
    amax, dmax = _global_relabel(n, first, head, rev, resid, s, t, height, excess, cur,
                                 act, ina, nxt, prv, state, queue)
    counters[3] += 1
    amax = min(amax, top)
    since_global = 0

    while True:
        while amax >= 0 and act[amax] < 0:
            amax -= 1
        if amax < 0:
            if top == dead - 1:
                break
            top = dead - 1
            since_global = n
        if since_global >= n:
            amax, dmax = _global_relabel(n, first, head, rev, resid, s, t, height, excess, cur,
                                         act, ina, nxt, prv, state, queue)
            counters[3] += 1
            amax = min(amax, top)
            since_global = 0
            continue

        u = act[amax]
        _remove(u, amax, act, nxt, prv)
        state[u] = -1
        since_global += 1

        # discharge u
        while excess[u] > 0:
            a = cur[u]
            if a == first[u + 1]:
                old = height[u]
                newh = dead
                for b in range(first[u], first[u + 1]):
                    if resid[b] > 0:
                        hb = height[head[b]] + 1
                        if hb < newh:
                            newh = hb
                counters[1] += 1
                cur[u] = first[u]
                if old < n and act[old] < 0 and ina[old] < 0:
                    # gap: nothing left at ``old``, so everything above it is cut off from t
                    counters[2] += 1
                    for lv in range(old + 1, dmax + 1):
                        v = act[lv]
                        while v >= 0:
                            w = nxt[v]
                            _remove(v, lv, act, nxt, prv)
                            height[v] = n
                            cur[v] = first[v]
                            _insert(v, n, act, nxt, prv)
                            if n > amax and n <= top:
                                amax = n
                            v = w
                        v = ina[lv]
                        while v >= 0:
                            w = nxt[v]
                            _remove(v, lv, ina, nxt, prv)
                            height[v] = n
                            cur[v] = first[v]
                            _insert(v, n, ina, nxt, prv)
                            v = w
                    dmax = old - 1
                    if newh < n:
                        newh = n
                height[u] = newh
                if newh > top:
                    break
                if newh < n and newh > dmax:
                    dmax = newh
                continue
            v = head[a]
            if resid[a] > 0 and height[u] == height[v] + 1:
                d = excess[u] if excess[u] < resid[a] else resid[a]
                resid[a] -= d
                resid[rev[a]] += d
                excess[u] -= d
                excess[v] += d
                counters[0] += 1
                if state[v] == 0 and excess[v] == d:
                    hv = height[v]
                    _remove(v, hv, ina, nxt, prv)
                    _insert(v, hv, act, nxt, prv)
                    state[v] = 1
                    if hv > amax and hv <= top:
                        amax = hv
                if resid[a] == 0:
                    cur[u] += 1
            else:
                cur[u] += 1

        hu = height[u]
        if hu < dead:
            if excess[u] > 0:
                _insert(u, hu, act, nxt, prv)
                state[u] = 1
                if hu > amax and hu <= top:
                    amax = hu
            else:
                _insert(u, hu, ina, nxt, prv)
                state[u] = 0
            if hu < n and hu > dmax:
                dmax = hu
    return excess, height, counters


@numba.njit(cache=True, nogil=True)
def _reachable(n, first, head, resid, root):
    seen = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    seen[root] = True
    queue[0] = root
    qh = 0
    qt = 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        for a in range(first[v], first[v + 1]):
            w = head[a]
            if resid[a] > 0 and not seen[w]:
                seen[w] = True
                queue[qt] = w
                qt += 1
    return seen


# ---------------------------------------------------------------------------
# public API

@dataclass(frozen=True, eq=False)
class FlowState:
    """Result of :func:`max_flow`.

    ``flow`` is per original arc of the network; ``excess`` and ``height`` are
    the final node labels. ``value`` is the flow into the sink.
    """

    value: int
    flow: np.ndarray
    excess: np.ndarray
    height: np.ndarray
    counters: dict
    first: np.ndarray = field(repr=False)
    head: np.ndarray = field(repr=False)
    resid: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class CutResult:
    """A minimum cut. ``value`` is None when the only cuts cross infinite arcs."""

    value: Union[int, None]
    cells: frozenset
    source_side: np.ndarray = field(repr=False)
    flow_value: int = 0

    @property
    def feasible(self) -> bool:
        return self.value is not None


def _residual_csr(n_nodes, tail, head, cap):
    """CSR residual graph; arc ``i`` and its reverse sit at ``fwd[i]`` and ``bwd[i]``."""
    m = tail.size
    r_tail = np.concatenate([tail, head])
    r_head = np.concatenate([head, tail])
    r_cap = np.concatenate([cap, np.zeros(m, dtype=np.int64)])
    order = np.argsort(r_tail, kind="stable")
    pos = np.empty(2 * m, dtype=np.int64)
    pos[order] = np.arange(2 * m)
    partner = np.concatenate([np.arange(m, 2 * m), np.arange(m)])
    rev = pos[partner[order]]
    first = np.searchsorted(r_tail[order], np.arange(n_nodes + 1), side="left").astype(np.int64)
    return first, r_head[order].astype(np.int64), rev.astype(np.int64), r_cap[order].astype(np.int64), pos[:m], pos[m:]


def _validate(net: FlowNetwork):
    if not net.has_sink:
        raise ContractViolation("network has no sink attached")
    if net.source == net.sink:
        raise ContractViolation("source and sink coincide")
    if net.n_arcs and (net.tail.min() < 0 or net.head.min() < 0
                       or max(net.tail.max(), net.head.max()) >= net.n_nodes):
        raise ContractViolation("arc endpoint out of range")
    if net.n_arcs and net.cap.min() < 0:
        raise ContractViolation("negative capacity")


def max_flow(net: FlowNetwork, reverse: bool = True) -> FlowState:
    """Maximum source-to-sink flow of ``net``.

    With ``reverse`` (the default) preflow-push runs on the reversed network,
    pushing from the sink towards the source. The value and the min cut are the
    same either way, but the source here is the whole contracted border, and
    flooding it with excess costs far more than flooding the small region
    around the targets. ``height`` and ``counters`` refer to the orientation
    actually solved.
    """
    _validate(net)
    first, r_head, rev, resid, fwd, bwd = _residual_csr(net.n_nodes, net.tail, net.head, net.cap)
    if reverse:
        # same arc pairs, capacity on the other copy
        resid[bwd] = net.cap
        resid[fwd] = 0
        excess, height, counters = _push_relabel(net.n_nodes, first, r_head, rev, resid, net.sink, net.source)
        excess = -excess
        flow = net.cap - resid[bwd]
        resid[bwd], resid[fwd] = resid[fwd].copy(), resid[bwd].copy()
    else:
        excess, height, counters = _push_relabel(net.n_nodes, first, r_head, rev, resid, net.source, net.sink)
        flow = net.cap - resid[fwd]
    state = FlowState(
        value=int(excess[net.sink]),
        flow=flow,
        excess=excess,
        height=height,
        counters=dict(zip(("pushes", "relabels", "gaps", "global_relabels"), counters.tolist())),
        first=first,
        head=r_head,
        resid=resid,
    )
    check_stats["solves"] += 1
    if _checked:
        _check_flow(net, state)
    return state


def _check_flow(net: FlowNetwork, state: FlowState):
    problems = []
    if np.any(state.flow < 0) or np.any(state.flow > net.cap):
        problems.append("capacity constraint violated")
    balance = np.zeros(net.n_nodes, dtype=np.int64)
    np.add.at(balance, net.head, state.flow)
    np.subtract.at(balance, net.tail, state.flow)
    inner = np.ones(net.n_nodes, dtype=bool)
    inner[[net.source, net.sink]] = False
    if np.any(balance[inner] != 0):
        problems.append("flow not conserved")
    if balance[net.sink] != state.value or balance[net.source] != -state.value:
        problems.append("sink inflow differs from reported value")
    if problems:
        check_stats["violations"] += 1
        raise FlowCheckError("; ".join(problems))


def extract_min_cut(net: FlowNetwork, state: FlowState) -> CutResult:
    """Canonical minimum cut: the source side is everything reachable in the residual graph."""
    side = _reachable(net.n_nodes, state.first, state.head, state.resid, net.source)
    if side[net.sink]:
        raise ContractViolation("flow is not maximal: sink still reachable in the residual graph")
    crossing = side[net.tail] & ~side[net.head]
    cut_arcs = np.flatnonzero(crossing)
    capacity = int(net.cap[cut_arcs].sum())
    infinite_cut = bool(np.any(net.cap[cut_arcs] >= net.infinite))
    if infinite_cut:
        value, cells = None, frozenset()
    else:
        # every finite arc is an internal arc, whose index is its compact cell
        cells = frozenset(net.cell_of_node(2 * int(a)) for a in cut_arcs)
        value = len(cells)
    if _checked:
        check_stats["duality_checks"] += 1
        ok = capacity == state.value and (infinite_cut or value == state.value)
        ok = ok and infinite_cut == (state.value >= net.infinite)
        if not ok:
            check_stats["violations"] += 1
            raise FlowCheckError(
                f"duality violated: flow {state.value}, cut capacity {capacity}, cells {value}")
    return CutResult(value=value, cells=cells, source_side=side, flow_value=state.value)


def min_vertex_cut(grid: OccupancyGrid, targets: Union[str, int] = "all") -> CutResult:
    """Minimum set of robot cells separating the border from ``targets``.

    ``targets`` is ``"all"`` for the merged sink or a single target id.
    """
    net = build_base_network(grid)
    if targets == "all":
        net = attach_merged_sink(net, grid)
    else:
        net = attach_single_sink(net, grid, int(targets))
    return extract_min_cut(net, max_flow(net))
