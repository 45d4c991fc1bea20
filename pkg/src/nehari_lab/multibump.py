"""N truncated solitons on a line, and the plus-branch energy as N grows.

The bumps have disjoint supports, so every integral is N times the single
bump value except the Coulomb energy, whose cross terms are exact point-charge
interactions by Newton's theorem.  No three-dimensional quadrature is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coulomb import disjoint_interaction, hartree_energy
from .energy import ModelParams
from .fibering import FiberCoeffs, g_beta_profile, nehari_times
from .radial import RadialFn, RadialGrid, VecPair, h1_norm_sq, l2_norm_sq, lp_norm_pow
from .soliton import SobolevConstants, scalar_ground_state
from .thresholds import beta0

__all__ = [
    "BumpConfig",
    "BumpCurve",
    "cutoff",
    "truncate",
    "single_bump",
    "bump_config",
    "cross_sum",
    "bump_coeffs",
    "bump_energy",
    "condition_67",
    "eta",
    "bracket_time",
    "bump_curve",
]


def cutoff(r: np.ndarray, R0: float) -> np.ndarray:
    """C^1 cubic smoothstep: 1 on [0, R0/2], 0 on [R0, inf), slope at most 3/R0."""
    s = np.clip((np.asarray(r, dtype=float) - 0.5 * R0) / (0.5 * R0), 0.0, 1.0)
    return 1.0 - s * s * (3.0 - 2.0 * s)


def truncate(w: RadialFn, R0: float) -> RadialFn:
    if not 0 < R0 < 0.5 * w.grid.r_max:
        raise ValueError(f"truncation radius must lie in (0, r_max/2), got {R0}")
    return RadialFn(w.grid, w.values * cutoff(w.grid.nodes, R0))


@dataclass(frozen=True)
class BumpConfig:
    R0: float
    N: int
    spacing: float
    q: float
    h1_sq: float
    p_integral: float
    hartree_self: float
    g: float
    s: float

    def __post_init__(self):
        if self.N >= 2 and not self.spacing > 2.0 * self.R0:
            raise ValueError(f"bumps overlap: spacing {self.spacing} <= 2 R0 = {2 * self.R0}")
        if not self.q > 0:
            raise ValueError("bump charge must be positive")


@dataclass(frozen=True)
class BumpCurve:
    Ns: tuple
    spacings: tuple
    t1: tuple
    t2: tuple
    energies: tuple
    cross_terms: tuple
    bounds: tuple
    single_bump_energy: float
    R0: float
    condition_67: bool
    brackets: tuple


def single_bump(params: ModelParams, R0: float, grid: RadialGrid) -> tuple[RadialFn, float, float]:
    s, g = g_beta_profile(params.p, params.beta)
    w = scalar_ground_state(params.p, g, grid).w
    return truncate(w, R0), s, g


def bump_config(params: ModelParams, R0: float, N: int, grid: RadialGrid) -> BumpConfig:
    u, s, g = single_bump(params, R0, grid)
    self_energy = hartree_energy(VecPair(u, grid.zeros()), params.kappa)
    return BumpConfig(R0, int(N), float(N) ** 3, l2_norm_sq(u), h1_norm_sq(u), lp_norm_pow(u, params.p),
                      self_energy, g, s)


def cross_sum(cfg: BumpConfig, kappa: float) -> float:
    """``sum_{i != j} kappa q^2 / (|i-j| spacing)`` for centers on a line."""
    total = 0.0
    for k in range(1, cfg.N):
        total += 2.0 * (cfg.N - k) * disjoint_interaction(cfg.q, cfg.q, k * cfg.spacing, kappa)
    return total


def bump_coeffs(params: ModelParams, cfg: BumpConfig) -> FiberCoeffs:
    N = cfg.N
    B = N * cfg.hartree_self + cross_sum(cfg, params.kappa)
    return FiberCoeffs(N * cfg.h1_sq, B, N * cfg.g * cfg.p_integral, params.p, params.lam)


def bump_energy(params: ModelParams, cfg: BumpConfig, t: float) -> float:
    return float(bump_coeffs(params, cfg).h(t))


def condition_67(params: ModelParams, cfg: BumpConfig, consts: SobolevConstants) -> bool:
    p = params.p
    K = 1.0 / consts.coulomb_product(params.kappa)
    lhs = 0.25 * params.lam * K * cfg.h1_sq
    ratio = cfg.g * cfg.p_integral / cfg.h1_sq
    rhs = (p - 2.0) / (2.0 * p) * ((4.0 - p) / p) ** ((4.0 - p) / (p - 2.0)) * ratio ** (2.0 / (p - 2.0))
    return bool(lhs < rhs)


def eta(cfg: BumpConfig, p: float, t: float) -> float:
    """``t^-2 A - t^(p-4) C`` for the N-bump coefficients; equals N times the single-bump value."""
    return cfg.N * (cfg.h1_sq / t**2 - t ** (p - 4.0) * cfg.g * cfg.p_integral)


def bracket_time(cfg: BumpConfig, p: float) -> float:
    """Scale separating the two Nehari times of every N-bump configuration."""
    return (2.0 * cfg.h1_sq / ((4.0 - p) * cfg.g * cfg.p_integral)) ** (1.0 / (p - 2.0))


def bump_curve(params: ModelParams, R0: float, Ns, consts: SobolevConstants, grid: RadialGrid,
               max_R0: float | None = None) -> BumpCurve:
    """Plus-branch energies of the N-bump configurations.

    R0 is increased in steps of 1/4 until the single-bump condition holds, as
    long as the smallest multi-bump spacing keeps the supports disjoint.
    """
    p, lam = params.p, params.lam
    if not params.beta > beta0(lam, p, consts, params.kappa):
        raise ValueError("the construction needs beta > beta0(lambda)")
    Ns = tuple(int(n) for n in Ns)
    multi = [n for n in Ns if n >= 2]
    limit = max_R0 if max_R0 is not None else (0.5 * min(multi) ** 3 if multi else 0.25 * grid.r_max)
    while True:
        base = bump_config(params, R0, 1, grid)
        ok = condition_67(params, base, consts)
        if ok or R0 + 0.25 >= limit:
            break
        R0 += 0.25
    if not ok:
        raise RuntimeError(f"single-bump condition fails for every admissible R0 up to {R0}; increase beta")
    t1s, t2s, energies, crosses, bounds, spacings, brackets = [], [], [], [], [], [], []
    mid = bracket_time(base, p)
    for N in Ns:
        cfg = BumpConfig(R0, N, float(N) ** 3, base.q, base.h1_sq, base.p_integral, base.hartree_self, base.g, base.s)
        co = bump_coeffs(params, cfg)
        roots = nehari_times(co)
        if roots.count != 2:
            raise RuntimeError(f"no plus-branch scaling for N={N}; increase R0 or beta")
        t1s.append(roots.t_minus)
        t2s.append(roots.t_plus)
        energies.append(float(co.h(roots.t_plus)))
        crosses.append(cross_sum(cfg, params.kappa))
        bounds.append(0.0 if N == 1 else (N * N - N) / (N**3 - 2.0 * R0) * cfg.q**2)
        spacings.append(cfg.spacing)
        brackets.append(bool(1.0 < roots.t_minus < mid < roots.t_plus))
    single = energies[Ns.index(1)] if 1 in Ns else float("nan")
    return BumpCurve(Ns, tuple(spacings), tuple(t1s), tuple(t2s), tuple(energies), tuple(crosses),
                     tuple(bounds), single, R0, ok, tuple(brackets))
