"""
Shared chokepoints
==================

Three targets sit in narrow pockets off one hall. Guarding each target on its
own costs a robot per pocket; guarding them together only needs the hall door.
"""

import tempfile
from pathlib import Path

from cordon.experiments import load_bundled_map
from cordon.oracle import find_leak, verify_separation
from cordon.planner import solve_holistic, solve_individual
from cordon.render import render_ascii, render_svg

##############################################################################
# The bundled map
# ---------------
#
# ``A``, ``B`` and ``C`` are targets, ``#`` is wall. The whole outer ring is
# free, so intruders can start anywhere along it.

grid = load_bundled_map("pathologic")
print(render_ascii(grid))

##############################################################################
# One cut per target
# ------------------
#
# Each pocket has a one-cell mouth, so every per-target cut is a single robot.
# The union is three robots.

individual = solve_individual(grid)
print("individual:", sorted(individual.robots), "flow values", individual.flow_values)
print(render_ascii(grid, individual.robots))

##############################################################################
# One merged cut
# --------------
#
# With every target wired to one sink the cheapest cut moves out to the
# two-cell door at the bottom of the hall.

holistic = solve_holistic(grid)
print("holistic:", sorted(holistic.robots))
print(render_ascii(grid, holistic.robots))
print("savings:", individual.count - holistic.count)

##############################################################################
# Checking without flows
# ----------------------
#
# The oracle walks the grid directly. Both placements separate, and pulling
# one robot out of the door opens a path.

assert verify_separation(grid, individual.robots)
assert verify_separation(grid, holistic.robots)
leak = find_leak(grid, set(holistic.robots) - {(6, 5)})
print("leak after removing (6, 5):", leak)

out = Path(tempfile.mkdtemp(prefix="cordon-demo-")) / "pathologic.svg"
out.write_text(render_svg(grid, holistic.robots, cell=24, title="holistic placement"))
print("wrote", out)
