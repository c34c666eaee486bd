"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st

from cordon.grid import FREE, OBSTACLE, OccupancyGrid


@st.composite
def small_grids(draw, min_side=3, max_side=8, max_targets=3, obstacle_odds=4):
    """Random grid with 1..max_targets single-cell targets off the outer ring."""
    h = draw(st.integers(min_side, max_side))
    w = draw(st.integers(min_side, max_side))
    rolls = draw(st.lists(st.integers(0, obstacle_odds - 1), min_size=h * w, max_size=h * w))
    cells = np.where(np.array(rolls).reshape(h, w) == 0, OBSTACLE, FREE).astype(np.int16)
    interior = [(r, c) for r in range(1, h - 1) for c in range(1, w - 1)]
    k = draw(st.integers(1, min(max_targets, len(interior))))
    chosen = draw(st.permutations(interior))[:k]
    for i, cell in enumerate(chosen):
        cells[cell] = i
    return OccupancyGrid(cells)
