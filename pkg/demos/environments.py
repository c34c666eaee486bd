"""
Random environments
===================

Open maps are stamped with random rectangles. Closed maps are a street grid
with some intersections blocked. Both are fully determined by their seed.
"""

import dataclasses

import numpy as np

from cordon.grid import GenSpec, closed_saturated, generate_environment, intersections
from cordon.planner import solve_holistic, solve_individual
from cordon.render import render_ascii

##############################################################################
# Open environment
# ----------------

spec = GenSpec(kind="open", width=30, height=16, obstacles=12, targets=5, seed=4, margin=2)
grid = generate_environment(spec)
print(render_ascii(grid))
print("free fraction %.2f" % grid.free_mask.mean())

##############################################################################
# Same seed, same map; a different seed gives a different one.

assert generate_environment(spec) == grid
other = generate_environment(dataclasses.replace(spec, seed=5))
print("cells differing under seed 5:", int(np.sum(other.cells != grid.cells)))

##############################################################################
# Closed environment
# ------------------
#
# With 3-cell blocks a 30x16 map has this many street crossings. Asking for
# more blocked crossings than exist simply blocks all of them.

print("crossings:", len(intersections(30, 16, 3)))
closed = GenSpec(kind="closed", width=30, height=16, obstacles=10, targets=4, seed=4, margin=2)
cgrid = generate_environment(closed)
print(render_ascii(cgrid))
print("saturated:", closed_saturated(closed))

##############################################################################
# Placements on both
# ------------------

for name, g in (("open", grid), ("closed", cgrid)):
    ind, hol = solve_individual(g), solve_holistic(g)
    print(f"{name}: individual {ind.count}, holistic {hol.count}")
    print(render_ascii(g, hol.robots))
