"""Multi-target access monitoring on occupancy grids via minimum vertex cuts."""

__version__ = "0.1.0"
