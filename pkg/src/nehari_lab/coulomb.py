"""Newton-kernel potential of a radial charge density and the Hartree energy.

For radial ``rho`` the potential ``kappa * int rho(y)/|x-y| dy`` reduces to
``4*pi*kappa * int rho(s) s^2 / max(r, s) ds``.  On the grid this is the
quadrature sum ``sum_j w_j rho_j / max(r_i, r_j)``, evaluated with two prefix
sums.  The discrete kernel ``w_i w_j / max(r_i, r_j)`` is symmetric, so the
Hartree energy is an exact quadratic form and its derivative is ``4 phi u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .radial import FOUR_PI, RadialFn, RadialGrid, VecPair, integrate

__all__ = [
    "CoulombField",
    "newton_potential",
    "potential_values",
    "hartree_energy",
    "cross_energy",
    "disjoint_interaction",
    "lions_gap",
]

NEGATIVE_RHO_TOL = 1e-14


def potential_values(grid: RadialGrid, rho: np.ndarray, kappa: float = 1.0) -> np.ndarray:
    r = grid.nodes
    a = grid.weights * rho
    inner = np.cumsum(a) / r
    outer = np.cumsum((a / r)[::-1])[::-1]
    outer = np.append(outer[1:], 0.0)
    return (FOUR_PI * kappa) * (inner + outer)


@dataclass(frozen=True)
class CoulombField:
    phi: RadialFn
    total_charge: float
    kappa: float

    def at(self, r: float) -> float:
        """Potential at any radius; outside the grid Newton's law is exact."""
        grid = self.phi.grid
        if r >= grid.r_max:
            return self.kappa * self.total_charge / r
        return float(np.interp(r, grid.nodes, self.phi.values))


def newton_potential(rho: RadialFn, kappa: float = 1.0) -> CoulombField:
    vals = rho.values
    if vals.size and vals.min() < -NEGATIVE_RHO_TOL:
        raise ValueError(f"charge density has negative samples (min {vals.min():.3e})")
    vals = np.clip(vals, 0.0, None)
    phi = potential_values(rho.grid, vals, kappa)
    return CoulombField(RadialFn(rho.grid, phi), integrate(rho.grid, vals), kappa)


def cross_energy(rho_a: RadialFn, rho_b: RadialFn, kappa: float = 1.0) -> float:
    """``int phi_a rho_b``; symmetric in its arguments."""
    return integrate(rho_a.grid, potential_values(rho_a.grid, rho_a.values, kappa) * rho_b.values)


def hartree_energy(pair: VecPair, kappa: float = 1.0) -> float:
    rho = pair.u.values**2 + pair.v.values**2
    return integrate(pair.grid, potential_values(pair.grid, rho, kappa) * rho)


def disjoint_interaction(q_i: float, q_j: float, d: float, kappa: float = 1.0) -> float:
    """Interaction of two radial clusters with disjoint supports at distance d."""
    if not d > 0:
        raise ValueError(f"separation must be positive, got {d}")
    return kappa * q_i * q_j / d


def lions_gap(pair: VecPair, a: float = 1.0, kappa: float = 1.0, component: str = "u") -> float:
    """Right minus left side of the Lions-type bound, corrected for the kernel.

    With ``-Delta phi = 4*pi*kappa*rho`` one gets
    ``4*pi*kappa int rho|w| <= a int|grad w|^2 + (pi*kappa/a) int phi rho``
    for w = u or v.  A nonnegative return value means the bound holds.
    """
    from .radial import dirichlet_energy

    w = pair.u if component == "u" else pair.v
    rho = pair.u.values**2 + pair.v.values**2
    lhs = FOUR_PI * kappa * integrate(pair.grid, rho * np.abs(w.values))
    rhs = a * dirichlet_energy(w) + (np.pi * kappa / a) * hartree_energy(pair, kappa)
    return rhs - lhs
