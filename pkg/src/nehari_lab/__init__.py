"""Numerical laboratory for a doubly coupled Schrödinger-Poisson system.

Radial grids and quadrature, the Coulomb potential, the energy and its
gradient, fibering-map algebra, scalar solitons, closed-form thresholds,
quotient maximization, Nehari-manifold solvers and multibump configurations.
"""

__version__ = "0.1.0"

from .energy import ModelParams, total_energy
from .radial import RadialFn, RadialGrid, VecPair, default_grid, make_grid

__all__ = ["ModelParams", "RadialFn", "RadialGrid", "VecPair", "default_grid", "make_grid", "total_energy", "__version__"]
