"""
Inside the flow network
=======================

Each passable cell splits into an in-half and an out-half. Only free interior
cells get a unit arc between the halves, so a finite minimum cut is a set of
cells a robot can stand on.
"""

from cordon.flownet import attach_merged_sink, attach_single_sink, build_base_network, dump_network
from cordon.grid import GenSpec, OccupancyGrid, generate_environment
from cordon.maxflow import extract_min_cut, max_flow

##############################################################################
# A tiny network
# --------------

tiny = OccupancyGrid.from_rows(["....", ".A..", "....", "...."])
net = attach_merged_sink(build_base_network(tiny), tiny)
print(dump_network(net))

##############################################################################
# The target touches a border cell through nothing but unguardable cells, so
# every cut crosses an infinite arc. That is reported as infeasible.

cut = extract_min_cut(net, max_flow(net))
print("feasible:", cut.feasible, "flow:", cut.flow_value, "infinite:", net.infinite)

##############################################################################
# Solver orientation
# ------------------
#
# The source is the whole contracted border. Running preflow-push from the
# sink side avoids flooding that large region with excess first. Both give
# the same value and the same canonical cut.

grid = generate_environment(GenSpec(kind="open", width=60, height=60, obstacles=40, targets=1,
                                    seed=3, margin=2))
net = attach_single_sink(build_base_network(grid), grid, 0)
for reverse in (False, True):
    state = max_flow(net, reverse=reverse)
    cut = extract_min_cut(net, state)
    print(f"reverse={reverse}: value {state.value}, cells {sorted(cut.cells)}, {state.counters}")
