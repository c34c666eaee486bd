"""Node-split flow networks for the access-monitoring cut.

Every non-obstacle cell ``k`` (numbered row-major over non-obstacle cells)
becomes two nodes, ``2k`` (in-half) and ``2k + 1`` (out-half), joined by an
internal arc. Only free interior cells get a unit internal arc; border, target
and all structural arcs carry ``infinite`` = number of grid cells + 1, so a
finite cut is always a set of cells a robot may stand on.

Arc order is fixed: internal arcs (arc ``k`` belongs to cell ``k``), then
adjacency arcs sorted by (tail, head), then source arcs, then sink arcs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import ContractViolation
from .grid import Cell, OccupancyGrid, neighbors


@dataclass(frozen=True, eq=False)
class FlowNetwork:
    n_nodes: int
    tail: np.ndarray
    head: np.ndarray
    cap: np.ndarray
    source: int
    sink: int
    infinite: int
    shape: tuple
    cell_index: np.ndarray  # compact cell k -> flat grid index
    n_internal: int

    @property
    def n_arcs(self) -> int:
        return int(self.tail.size)

    @property
    def has_sink(self) -> bool:
        return self.sink >= 0

    @property
    def degenerate_source(self) -> bool:
        """True when no border cell is free: nothing can enter, zero robots needed."""
        return not np.any(self.tail == self.source)

    def cell_of_node(self, node: int) -> Optional[Cell]:
        k = node // 2
        if node < 0 or k >= self.n_internal:
            return None
        return divmod(int(self.cell_index[k]), self.shape[1])

    def node_role(self, node: int) -> str:
        if node == self.source:
            return "source"
        if node == self.sink:
            return "sink"
        if node // 2 < self.n_internal:
            return "in" if node % 2 == 0 else "out"
        return "aux"

    def in_node(self, cell: Cell) -> int:
        return 2 * self._compact(cell)

    def out_node(self, cell: Cell) -> int:
        return 2 * self._compact(cell) + 1

    def _compact(self, cell: Cell) -> int:
        flat = cell[0] * self.shape[1] + cell[1]
        k = int(np.searchsorted(self.cell_index, flat))
        if k >= self.n_internal or self.cell_index[k] != flat:
            raise ContractViolation(f"cell {cell} has no node (obstacle or out of bounds)")
        return k

    def out_degree(self, node: int) -> int:
        return int(np.count_nonzero(self.tail == node))


def build_base_network(grid: OccupancyGrid) -> FlowNetwork:
    """Dual graph of the non-obstacle cells, node-split, with the border contracted to a source."""
    h, w = grid.shape
    passable = ~grid.obstacle_mask
    flat_ok = passable.ravel()
    cell_index = np.flatnonzero(flat_ok)
    k_count = cell_index.size
    compact = np.full(h * w, -1, dtype=np.int64)
    compact[cell_index] = np.arange(k_count)
    infinite = h * w + 1

    internal_cap = np.where(grid.interior_free_mask.ravel()[cell_index], 1, infinite)
    k = np.arange(k_count, dtype=np.int64)

    idx = np.arange(h * w).reshape(h, w)
    pairs = []
    horiz = passable[:, :-1] & passable[:, 1:]
    pairs.append((idx[:, :-1][horiz], idx[:, 1:][horiz]))
    vert = passable[:-1, :] & passable[1:, :]
    pairs.append((idx[:-1, :][vert], idx[1:, :][vert]))
    a = np.concatenate([p[0] for p in pairs])
    b = np.concatenate([p[1] for p in pairs])
    u = compact[np.concatenate([a, b])]
    v = compact[np.concatenate([b, a])]
    adj_tail = 2 * u + 1
    adj_head = 2 * v
    order = np.lexsort((adj_head, adj_tail))
    adj_tail, adj_head = adj_tail[order], adj_head[order]

    source = 2 * k_count
    border = compact[np.flatnonzero(grid.border_mask.ravel())]

    tail = np.concatenate([2 * k, adj_tail, np.full(border.size, source)])
    head = np.concatenate([2 * k + 1, adj_head, 2 * border])
    cap = np.concatenate([internal_cap, np.full(adj_tail.size + border.size, infinite)])
    return FlowNetwork(
        n_nodes=source + 1,
        tail=tail.astype(np.int64),
        head=head.astype(np.int64),
        cap=cap.astype(np.int64),
        source=source,
        sink=-1,
        infinite=infinite,
        shape=(h, w),
        cell_index=cell_index,
        n_internal=k_count,
    )


def _with_sink(net: FlowNetwork, feeders) -> FlowNetwork:
    if net.has_sink:
        raise ContractViolation("network already has a sink")
    sink = net.n_nodes
    feeders = np.asarray(sorted(set(int(x) for x in feeders)), dtype=np.int64)
    return replace(
        net,
        n_nodes=net.n_nodes + 1,
        tail=np.concatenate([net.tail, feeders]),
        head=np.concatenate([net.head, np.full(feeders.size, sink, dtype=np.int64)]),
        cap=np.concatenate([net.cap, np.full(feeders.size, net.infinite, dtype=np.int64)]),
        sink=sink,
    )


def attach_single_sink(net: FlowNetwork, grid: OccupancyGrid, target_id: int) -> FlowNetwork:
    """Copy of ``net`` whose sink collects the cells of one target."""
    cells = grid.target_cells(target_id)
    return _with_sink(net, [net.out_node(c) for c in cells])


def attach_merged_sink(net: FlowNetwork, grid: OccupancyGrid) -> FlowNetwork:
    """Copy of ``net`` with one super-sink fed by every target cell."""
    if grid.m < 1:
        raise ContractViolation("merged sink needs at least one target")
    return _with_sink(net, [net.out_node(c) for c in grid.target_cells()])


def attach_merged_sink_rewired(net: FlowNetwork, grid: OccupancyGrid) -> FlowNetwork:
    """Merged sink built by rewiring target neighbours, edge by edge.

    For every target and each of its passable neighbours, the neighbour's arc
    into the target is dropped and an arc to the sink added instead. Cut values
    match :func:`attach_merged_sink`; kept as a cross-check of that shortcut.
    """
    if grid.m < 1:
        raise ContractViolation("merged sink needs at least one target")
    feeders = set()
    dropped = set()
    for t in grid.target_cells():
        t_in = net.in_node(t)
        for nb in neighbors(grid, t):
            if grid.obstacle_mask[nb]:
                continue
            feeders.add(net.out_node(nb))
            dropped.add((net.out_node(nb), t_in))
    keep = np.array([(int(a), int(b)) not in dropped for a, b in zip(net.tail, net.head)], dtype=bool)
    pruned = replace(net, tail=net.tail[keep], head=net.head[keep], cap=net.cap[keep])
    return _with_sink(pruned, feeders)


def dump_network(net: FlowNetwork) -> str:
    """Edge list ``tail head capacity`` preceded by a ``#`` node legend."""
    lines = [
        f"# cordon-flownet v1 nodes={net.n_nodes} arcs={net.n_arcs} "
        f"source={net.source} sink={net.sink} infinite={net.infinite}"
    ]
    for node in range(net.n_nodes):
        role = net.node_role(node)
        cell = net.cell_of_node(node)
        where = f" {cell[0]} {cell[1]}" if cell is not None else ""
        lines.append(f"# node {node} {role}{where}")
    lines.extend(f"{t} {h} {c}" for t, h, c in zip(net.tail.tolist(), net.head.tolist(), net.cap.tolist()))
    return "\n".join(lines) + "\n"
