"""The two-component energy, its Euler-Lagrange residual and Pohozaev data.

    J(u,v) = 1/2 ||(u,v)||_H^2 + lam/4 int phi rho - 1/p int F_beta(u,v)

with ``rho = u^2 + v^2`` and
``F_beta = |u|^p + |v|^p + 2 beta |u|^{p/2} |v|^{p/2}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coulomb import potential_values
from .radial import (
    FOUR_PI,
    RadialFn,
    RadialGrid,
    VecPair,
    integrate,
    lp_norm_pow,
    stiffness_apply,
)

__all__ = [
    "ModelParams",
    "EnergyBreakdown",
    "ResidualPair",
    "PohozaevData",
    "coupling_density",
    "coupling_integral",
    "total_energy",
    "el_residual",
    "scalar_energy",
    "pohozaev",
    "pohozaev_general_solution",
    "coercivity_lower_bound",
    "lions_constant",
]


@dataclass(frozen=True)
class ModelParams:
    p: float
    lam: float
    beta: float
    kappa: float = 1.0
    relaxed: bool = False

    def __post_init__(self):
        upper = 6.0 if self.relaxed else 4.0
        if not 2.0 < self.p < upper:
            raise ValueError(f"exponent p must lie in (2, {upper:g}), got {self.p}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not self.kappa > 0:
            raise ValueError(f"kernel prefactor must be positive, got {self.kappa}")

    def with_(self, **changes) -> "ModelParams":
        fields = dict(p=self.p, lam=self.lam, beta=self.beta, kappa=self.kappa, relaxed=self.relaxed)
        fields.update(changes)
        return ModelParams(**fields)


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    mass: float
    hartree: float
    coupling: float
    total: float

    @property
    def h_norm_sq(self) -> float:
        return self.kinetic + self.mass


@dataclass(frozen=True)
class ResidualPair:
    res_u: RadialFn
    res_v: RadialFn
    norm: float


@dataclass(frozen=True)
class PohozaevData:
    z1: float
    z2: float
    z3: float
    z4: float
    theta: float
    poho_residual: float


def coupling_density(u: np.ndarray, v: np.ndarray, p: float, beta: float) -> np.ndarray:
    au, av = np.abs(u), np.abs(v)
    return au**p + av**p + 2.0 * beta * (au * av) ** (0.5 * p)


def coupling_integral(pair: VecPair, p: float, beta: float) -> float:
    if beta == 0.0:
        return lp_norm_pow(pair.u, p) + lp_norm_pow(pair.v, p)
    return integrate(pair.grid, coupling_density(pair.u.values, pair.v.values, p, beta))


def _coupling_force(u: np.ndarray, v: np.ndarray, p: float, beta: float) -> np.ndarray:
    """``|u|^{p-2}u + beta |v|^{p/2} |u|^{p/2-2} u``, finite at u = 0."""
    au = np.abs(u)
    force = au ** (p - 2.0) * u
    if beta:
        force = force + beta * np.abs(v) ** (0.5 * p) * np.sign(u) * au ** (0.5 * p - 1.0)
    return force


def _evaluate(grid: RadialGrid, u: np.ndarray, v: np.ndarray, params: ModelParams, grad: bool = True):
    """Energy pieces and (optionally) the residual arrays on raw samples."""
    p, lam = params.p, params.lam
    rho = u * u + v * v
    phi = potential_values(grid, rho, params.kappa)
    c = grid.couplings
    kinetic = FOUR_PI * float(np.dot(c, np.diff(u) ** 2) + np.dot(c, np.diff(v) ** 2))
    mass = FOUR_PI * float(np.dot(grid.weights, rho))
    hartree = FOUR_PI * float(np.dot(grid.weights, phi * rho))
    coupling = FOUR_PI * float(np.dot(grid.weights, coupling_density(u, v, p, params.beta)))
    total = 0.5 * (kinetic + mass) + 0.25 * lam * hartree - coupling / p
    br = EnergyBreakdown(kinetic, mass, hartree, coupling, total)
    if not grad:
        return br, None, None
    w = grid.weights
    res_u = stiffness_apply(grid, u) / w + u + lam * phi * u - _coupling_force(u, v, p, params.beta)
    res_v = stiffness_apply(grid, v) / w + v + lam * phi * v - _coupling_force(v, u, p, params.beta)
    res_u[-1] = 0.0
    res_v[-1] = 0.0
    return br, res_u, res_v


def total_energy(pair: VecPair, params: ModelParams) -> EnergyBreakdown:
    return _evaluate(pair.grid, pair.u.values, pair.v.values, params, grad=False)[0]


def el_residual(pair: VecPair, params: ModelParams) -> ResidualPair:
    """Residual of both Euler-Lagrange equations.

    The Laplacian is the conservative three-point stencil; with the grid
    inner product ``integrate(res * delta)`` it is exactly the derivative of
    the discrete energy in the direction ``delta`` (for delta vanishing at
    r_max).
    """
    grid = pair.grid
    _, ru, rv = _evaluate(grid, pair.u.values, pair.v.values, params)
    norm = float(np.sqrt(integrate(grid, ru * ru + rv * rv)))
    return ResidualPair(RadialFn(grid, ru), RadialFn(grid, rv), norm)


def scalar_energy(z: RadialFn, params: ModelParams) -> float:
    """``I_lam(z) = J(z, 0)``."""
    return total_energy(VecPair(z, z.grid.zeros()), params).total


def pohozaev(pair: VecPair, params: ModelParams) -> PohozaevData:
    br = total_energy(pair, params)
    z1, z2, z3, z4 = br.kinetic, br.mass, br.hartree, br.coupling
    res = abs(0.5 * z1 + 1.5 * z2 + 1.25 * params.lam * z3 - 3.0 * z4 / params.p)
    return PohozaevData(z1, z2, z3, z4, br.total, res)


def pohozaev_general_solution(theta: float, t: float, p: float, lam: float) -> np.ndarray:
    """All (z1..z4) solving the energy, Nehari and Pohozaev relations at level theta.

    The three linear equations in four unknowns have the one-parameter family
    ``theta/(p-2) * (3(p-2), 6-p, 0, 2p) + t * (p-2, -2(p-3), 2(p-2)/lam, p)``.
    """
    base = np.array([3.0 * (p - 2.0), 6.0 - p, 0.0, 2.0 * p]) * (theta / (p - 2.0))
    kernel = np.array([p - 2.0, -2.0 * (p - 3.0), 2.0 * (p - 2.0) / lam, p])
    return base + t * kernel


def lions_constant(kappa: float = 1.0) -> float:
    """c with ``c sqrt(lam) int rho|w| <= 1/4 int|grad w|^2 + lam/16 int phi rho``."""
    return 0.5 * np.sqrt(np.pi * kappa)


def coercivity_lower_bound(pair: VecPair, params: ModelParams) -> float:
    """Lower bound for J obtained by absorbing the Coulomb cross terms.

    ``1/4 ||(u,v)||^2 + lam/8 int phi rho
      + sum_w int (w^2/4 + c sqrt(lam) |w|^3 - (1+beta)/p |w|^p)``.
    """
    br = total_energy(pair, params)
    c = lions_constant(params.kappa) * np.sqrt(params.lam)
    tail = 0.0
    for w in (pair.u.values, pair.v.values):
        aw = np.abs(w)
        tail += integrate(pair.grid, 0.25 * w * w + c * aw**3 - (1.0 + params.beta) / params.p * aw**params.p)
    return 0.25 * br.h_norm_sq + 0.125 * params.lam * br.hartree + tail
