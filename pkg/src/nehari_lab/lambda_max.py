"""Maximization of the Coulomb-normalized quotients over radial grid pairs.

    Lambda(beta)    = sup ((1/p) C - (1/2) A) / B
    LambdaBar(beta) = sup (C - A) / B

with ``A = ||(u,v)||_H^2``, ``B = int phi rho``, ``C = int F_beta``.  Along
a ray the best scaling is explicit, and the ray maximum is

    R = c * A^{(p-4)/(p-2)} * C^{2/(p-2)} / B,

a scale-free functional whose constant c is the only difference between the
two variants.  Maximizing log R therefore needs no cone constraint (the ray
maximum always has a positive numerator).  A byproduct is the exact ratio
``LambdaBar / Lambda = 2 (p/2)^{2/(p-2)}`` on any admissible set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .coulomb import potential_values
from .descent import descend, dual_norm_sq, h1_inner
from .energy import ModelParams, _coupling_force, _evaluate
from .fibering import fiber_coeffs
from .radial import RadialGrid, VecPair, stiffness_apply
from .soliton import soliton_pair

__all__ = [
    "QuotientVariant",
    "QuotientConfig",
    "QuotientResult",
    "ray_maximum",
    "ray_optimal_scale",
    "quotient_value",
    "variant_ratio",
    "maximize_quotient",
    "random_pairs",
    "nonexistence_check",
]


class QuotientVariant(str, enum.Enum):
    LAMBDA = "Lambda"
    LAMBDA_BAR = "LambdaBar"


def _numerator(variant: QuotientVariant, p: float, A: float, C: float) -> float:
    if variant is QuotientVariant.LAMBDA:
        return C / p - 0.5 * A
    return C - A


def quotient_value(variant: QuotientVariant, p: float, A: float, B: float, C: float) -> float:
    return _numerator(variant, p, A, C) / B


def ray_optimal_scale(variant: QuotientVariant, p: float, A: float, C: float) -> float:
    """t maximizing the quotient of ``t * pair``."""
    ratio = p * A / ((4.0 - p) * C) if variant is QuotientVariant.LAMBDA else 2.0 * A / ((4.0 - p) * C)
    return ratio ** (1.0 / (p - 2.0))


def ray_maximum(variant: QuotientVariant, p: float, A: float, B: float, C: float) -> float:
    t = ray_optimal_scale(variant, p, A, C)
    return quotient_value(variant, p, t * t * A, t**4 * B, t**p * C)


def variant_ratio(p: float) -> float:
    """``LambdaBar / Lambda``, identical for every direction."""
    return 2.0 * (p / 2.0) ** (2.0 / (p - 2.0))


@dataclass(frozen=True)
class QuotientConfig:
    n_random: int = 8
    seed: int = 0
    max_iter: int = 4000
    gtol: float = 1e-7


@dataclass(frozen=True)
class QuotientResult:
    variant: QuotientVariant
    p: float
    beta: float
    value: float
    maximizer: VecPair
    iterations: int
    first_order_residual: float
    seed: int
    start_values: tuple
    best_start: str


def random_pairs(grid: RadialGrid, count: int, rng: np.random.Generator, nonneg: bool = False) -> list[VecPair]:
    """Smooth decaying radial pairs: sums of a few random Gaussian shells."""
    r = grid.nodes
    pairs = []
    for _ in range(count):
        comps = []
        for _ in range(2):
            f = np.zeros_like(r)
            for _ in range(rng.integers(1, 4)):
                amp = rng.uniform(0.2, 2.0) * (1.0 if nonneg else rng.choice([-1.0, 1.0]))
                center = rng.uniform(0.0, 4.0)
                width = rng.uniform(0.5, 2.5)
                f += amp * np.exp(-(((r - center) / width) ** 2))
            f[-1] = 0.0
            comps.append(f)
        pairs.append(VecPair.from_arrays(grid, comps[0], comps[1]))
    return pairs


def _log_ray_max(grid: RadialGrid, x: np.ndarray, params: ModelParams, variant: QuotientVariant):
    """Negative log of the ray maximum and its L^2 gradient field."""
    p = params.p
    u, v = x
    br, _, _ = _evaluate(grid, u, v, params, grad=False)
    A, B, C = br.h_norm_sq, br.hartree, br.coupling
    if not (A > 0 and B > 0 and C > 0):
        return np.inf, np.zeros_like(x)
    phi = potential_values(grid, u * u + v * v, params.kappa)
    w = grid.weights
    a_exp, c_exp = (p - 4.0) / (p - 2.0), 2.0 / (p - 2.0)
    grad = np.empty_like(x)
    for k, (s, o) in enumerate(((u, v), (v, u))):
        dA = 2.0 * (stiffness_apply(grid, s) / w + s)
        dB = 4.0 * phi * s
        dC = p * _coupling_force(s, o, p, params.beta)
        grad[k] = -(a_exp * dA / A + c_exp * dC / C - dB / B)
        grad[k, -1] = 0.0
    value = -np.log(ray_maximum(variant, p, A, B, C))
    return value, grad


def _normalize(grid: RadialGrid, y: np.ndarray) -> np.ndarray:
    y = np.abs(y)
    y[:, -1] = 0.0
    return y / np.sqrt(h1_inner(grid, y, y))


def _at_ray_optimum(grid: RadialGrid, x: np.ndarray, params: ModelParams, variant: QuotientVariant) -> VecPair:
    pair = VecPair.from_arrays(grid, x[0], x[1])
    co = fiber_coeffs(pair, params)
    return pair.scaled(ray_optimal_scale(variant, params.p, co.A, co.C))


def maximize_quotient(beta: float, p: float, variant: QuotientVariant | str, grid: RadialGrid,
                      config: QuotientConfig = QuotientConfig(), kappa: float = 1.0) -> QuotientResult:
    """Multi-start ascent of the ray-maximized quotient.

    Starts: the split soliton and ``config.n_random`` random nonnegative
    pairs.  Each run is preconditioned descent on ``-log R``; the best run is
    returned at its optimal scale.
    """
    variant = QuotientVariant(variant)
    if not 2.0 < p < 3.0:
        raise ValueError(f"quotients are studied for 2 < p < 3, got {p}")
    params = ModelParams(p, 1.0, beta, kappa)
    rng = np.random.default_rng(config.seed)
    seeds = [("split-soliton", soliton_pair(p, beta, grid)[0])]
    seeds += [(f"random-{i}", pr) for i, pr in enumerate(random_pairs(grid, config.n_random, rng, nonneg=True))]

    def evaluate(x):
        return _log_ray_max(grid, x, params, variant)

    best = None
    starts = []
    for name, pair in seeds:
        x0 = np.vstack([pair.u.values, pair.v.values])
        res = descend(grid, x0, evaluate, lambda y: _normalize(grid, y),
                      max_iter=config.max_iter, gtol=config.gtol)
        value = float(np.exp(-res.value))
        starts.append((name, value))
        if best is None or value > best[1]:
            best = (name, value, res)
    if best is None or not best[1] > 0:
        raise RuntimeError("no pair with positive quotient was found")
    name, value, res = best
    x = res.x
    stationarity = np.sqrt(dual_norm_sq(grid, res.grad) * h1_inner(grid, x, x))
    pair = _at_ray_optimum(grid, x, params, variant)
    co = fiber_coeffs(pair, params)
    direct = quotient_value(variant, p, co.A, co.B, co.C)
    return QuotientResult(variant, p, beta, direct, pair, res.iterations, float(stationarity),
                          config.seed, tuple(starts), name)


def nonexistence_check(lam: float, beta: float, p: float, grid: RadialGrid, trials: int = 1000,
                       seed: int = 0, extra_pairs=(), kappa: float = 1.0) -> bool:
    """True iff the Nehari defect ``A + lam B - C`` is positive on every sample.

    Each sample is rescaled to the point of its ray where the defect is
    smallest relative to ``B``, so a sample passes only if lam exceeds its
    own ray maximum of ``(C - A)/B``.
    """
    params = ModelParams(p, lam, beta, kappa)
    rng = np.random.default_rng(seed)
    samples = list(random_pairs(grid, trials, rng)) + list(extra_pairs)
    for pair in samples:
        if pair.is_trivial:
            continue
        co = fiber_coeffs(pair, params)
        if co.C > 0:
            co = co.scaled(ray_optimal_scale(QuotientVariant.LAMBDA_BAR, p, co.A, co.C))
        if not co.nehari_defect() > 0:
            return False
    return True
