"""Invariant suites run by ``nehari-lab verify``.

Each check returns a ``Check`` with a pass flag and a small detail dict.
Identities are exact relations (closed forms, algebraic identities, oracles
with known values); inequalities are bounds that must hold on every sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coulomb import lions_gap, potential_values
from .energy import ModelParams, _evaluate, pohozaev_general_solution, scalar_energy, total_energy
from .fibering import FiberCoeffs, g_beta_profile, g_max_profile, nehari_times, split_equal
from .lambda_max import QuotientVariant, random_pairs, ray_maximum, variant_ratio
from .multibump import bump_config, bump_curve, bump_energy, single_bump
from .radial import FOUR_PI, RadialGrid, VecPair, integrate, make_grid
from .soliton import S_BAR, sobolev_constants, talenti_minimum
from .thresholds import beta0, lambda0, lambda0_from_a

SUITES = ("identities", "inequalities", "all")


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_quadrature(grid: RadialGrid) -> Check:
    R = grid.r_max
    errs = [_rel(integrate(grid, grid.nodes**k), FOUR_PI * R ** (k + 3) / (k + 3)) for k in range(3)]
    return Check("quadrature_polynomials", max(errs) < 1e-12, {"max_rel_error": max(errs)})


def check_gaussian_coulomb(grid: RadialGrid) -> Check:
    rho = np.exp(-grid.nodes**2)
    value = integrate(grid, potential_values(grid, rho, 1.0) * rho)
    exact = np.sqrt(2.0) * np.pi**2.5
    err = _rel(value, exact)
    return Check("gaussian_coulomb", err < 1e-5, {"value": value, "exact": exact, "rel_error": err})


def check_pohozaev_anchors() -> Check:
    a = pohozaev_general_solution(1.0, 0.0, 3.0, 1.0)
    b = pohozaev_general_solution(1.0, 1.0, 3.0, 1.0)
    ok = np.allclose(a, [3, 3, 0, 6], rtol=0, atol=1e-14) and np.allclose(b, [4, 3, 2, 9], rtol=0, atol=1e-14)
    return Check("pohozaev_anchors", bool(ok), {"t0": a.tolist(), "t1": b.tolist()})


def check_quadratic_roots() -> Check:
    roots = nehari_times(FiberCoeffs(1.0, 1.0, 3.0, 3.0, 1.0))
    lo, hi = (3.0 - np.sqrt(5.0)) / 2.0, (3.0 + np.sqrt(5.0)) / 2.0
    err = max(_rel(roots.t_minus, lo), _rel(roots.t_plus, hi))
    return Check("quadratic_roots", roots.count == 2 and err < 1e-12, {"t_minus": roots.t_minus, "t_plus": roots.t_plus})


def check_argmax_half() -> Check:
    worst = 0.0
    for p in (2.2, 2.5, 3.0, 3.5, 3.9):
        for beta in (0.5, 1.0, 10.0):
            if beta >= (p - 2.0) / 2.0:
                worst = max(worst, abs(g_beta_profile(p, beta)[0] - 0.5))
    return Check("g_beta_argmax_half", worst < 1e-10, {"max_deviation": worst})


def check_split_gap(grid: RadialGrid, rng: np.random.Generator, count: int = 20) -> Check:
    params = ModelParams(2.5, 1.0, 1.0)
    _, g_max = g_beta_profile(params.p, params.beta)
    worst = 0.0
    for pair in random_pairs(grid, count, rng):
        z = pair.u
        split = split_equal(z, params)
        gap = scalar_energy(z, params) - total_energy(split.pair, params).total
        worst = max(worst, _rel(gap, split.energy_drop))
    return Check("split_energy_gap", worst < 1e-9, {"max_rel_error": worst, "g_max": g_max})


def check_gradient(grid: RadialGrid, rng: np.random.Generator, count: int = 5) -> Check:
    """Residual against central differences along ``(m_u u, m_v v)``.

    The coupling is only C^1 where ``|u| << h |du|``, so the directions are the
    base scaled by smooth random multipliers; along those lines J is smooth.
    """
    params = ModelParams(2.5, 1.0, 1.0)
    r = grid.nodes
    worst = 0.0
    for base in random_pairs(grid, count, rng):
        u, v = base.u.values, base.v.values
        mu, mv = (np.cos(rng.uniform(0.2, 2.0) * r + rng.uniform(0, 2 * np.pi)) for _ in range(2))
        du, dv = mu * u, mv * v
        _, ru, rv = _evaluate(grid, u, v, params)
        analytic = integrate(grid, ru * du + rv * dv)
        eps = 1e-5
        fp = _evaluate(grid, u + eps * du, v + eps * dv, params, grad=False)[0].total
        fm = _evaluate(grid, u - eps * du, v - eps * dv, params, grad=False)[0].total
        worst = max(worst, _rel((fp - fm) / (2 * eps), analytic))
    return Check("gradient_consistency", worst < 1e-5, {"max_rel_error": worst})


def check_variant_ratio(rng: np.random.Generator, count: int = 100) -> Check:
    worst = 0.0
    for _ in range(count):
        p = rng.uniform(2.05, 3.95)
        A, B, C = rng.uniform(0.1, 10.0, size=3)
        ratio = ray_maximum(QuotientVariant.LAMBDA_BAR, p, A, B, C) / ray_maximum(QuotientVariant.LAMBDA, p, A, B, C)
        worst = max(worst, _rel(ratio, variant_ratio(p)))
    return Check("quotient_variant_ratio", worst < 1e-12, {"max_rel_error": worst})


def check_lambda0(grid: RadialGrid) -> Check:
    worst = 0.0
    for p in (3.0, 3.5):
        consts = sobolev_constants(p, grid)
        worst = max(worst, _rel(lambda0(p, consts), lambda0_from_a(p, consts)))
    return Check("lambda0_rederived", worst < 1e-10, {"max_rel_error": worst})


def check_single_bump(grid: RadialGrid) -> Check:
    consts = sobolev_constants(2.5, grid)
    params = ModelParams(2.5, 1.0, 2.0 * beta0(1.0, 2.5, consts))
    u, s, _ = single_bump(params, 3.5, grid)
    cfg = bump_config(params, 3.5, 1, grid)
    direct = total_energy(VecPair(u * np.sqrt(s), u * np.sqrt(1.0 - s)), params).total
    value = bump_energy(params, cfg, 1.0)
    err = _rel(value, direct)
    return Check("single_bump_energy", err < 1e-10, {"bump_energy": value, "direct": direct, "rel_error": err})


def identities(grid: RadialGrid, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    return [
        check_quadrature(grid),
        check_gaussian_coulomb(grid),
        check_pohozaev_anchors(),
        check_quadratic_roots(),
        check_argmax_half(),
        check_split_gap(grid, rng),
        check_gradient(grid, rng),
        check_variant_ratio(rng),
        check_lambda0(grid),
        check_single_bump(grid),
    ]


def check_lions(grid: RadialGrid, rng: np.random.Generator, count: int = 200) -> Check:
    worst = np.inf
    for pair in random_pairs(grid, count, rng):
        worst = min(worst, lions_gap(pair, 1.0, 1.0, "u"), lions_gap(pair, 1.0, 1.0, "v"))
    return Check("lions_inequality", bool(worst >= 0), {"min_gap": worst})


def check_g_max(rng: np.random.Generator) -> Check:
    worst = np.inf
    for p in (2.2, 2.5, 3.0, 3.5, 3.9):
        for beta in (0.01, 0.1, 1.0, 10.0):
            worst = min(worst, g_max_profile(p, beta)[1])
    return Check("g_max_above_one", bool(worst > 0), {"min_excess": worst})


def check_coulomb_bound(grid: RadialGrid, rng: np.random.Generator, count: int = 100) -> Check:
    consts = sobolev_constants(2.5, grid)
    K = 1.0 / consts.coulomb_product(1.0)
    worst = 0.0
    for pair in random_pairs(grid, count, rng):
        br = total_energy(pair, ModelParams(2.5, 1.0, 0.0))
        worst = max(worst, br.hartree / (K * br.h_norm_sq**2))
    return Check("coulomb_sobolev_bound", bool(worst <= 1.0), {"max_ratio": worst})


def check_talenti() -> Check:
    alpha, ratio = talenti_minimum()
    ok = ratio >= S_BAR * (1.0 - 1e-4) and abs(ratio - S_BAR) < 1e-3 * S_BAR
    return Check("talenti_minimum", bool(ok), {"alpha": alpha, "ratio": ratio, "S_bar": S_BAR})


def check_multibump_bounds(grid: RadialGrid) -> Check:
    consts = sobolev_constants(2.5, grid)
    params = ModelParams(2.5, 1.0, 2.0 * beta0(1.0, 2.5, consts))
    curve = bump_curve(params, 3.0, (1, 2, 4, 8), consts, grid)
    ok = all(c <= b for c, b in zip(curve.cross_terms, curve.bounds))
    return Check("multibump_cross_bounds", bool(ok), {"cross": list(curve.cross_terms), "bounds": list(curve.bounds)})


def check_strauss(grid: RadialGrid, rng: np.random.Generator, count: int = 50) -> Check:
    """``r |u(r)| <= ||u||_H / sqrt(4 pi)``.

    From ``r^2 u(r)^2 <= 2 int_r^inf s^2 |u u'| ds`` and Cauchy-Schwarz.
    """
    from .radial import strauss_ratio

    worst = max(strauss_ratio(pair.u) for pair in random_pairs(grid, count, rng))
    bound = 1.0 / np.sqrt(FOUR_PI)
    return Check("strauss_decay", bool(worst <= bound), {"max_ratio": worst, "bound": bound})


def inequalities(grid: RadialGrid, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed + 1)
    return [
        check_lions(grid, rng),
        check_g_max(rng),
        check_coulomb_bound(grid, rng),
        check_strauss(grid, rng),
        check_talenti(),
        check_multibump_bounds(grid),
    ]


def run_suite(name: str, grid: RadialGrid | None = None, seed: int = 0) -> list[Check]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    grid = grid or make_grid()
    out = []
    if name in ("identities", "all"):
        out += identities(grid, seed)
    if name in ("inequalities", "all"):
        out += inequalities(grid, seed)
    return out
