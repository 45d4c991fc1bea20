"""Fibering maps t -> J(t u, t v) and the Nehari manifold.

Along a ray the energy is ``h(t) = t^2 A/2 + lam t^4 B/4 - t^p C/p`` with
``A = ||(u,v)||_H^2``, ``B = int phi rho`` and ``C = int F_beta``.  Positive
critical points of h solve ``A + lam B t^2 - C t^{p-2} = 0``; the sign of
the derivative of the left side at a root decides the branch.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.optimize import brentq

from .energy import ModelParams, _evaluate
from .radial import RadialFn, VecPair, lp_norm_pow

if TYPE_CHECKING:
    from .soliton import SobolevConstants

__all__ = [
    "NehariClass",
    "Region",
    "FiberCoeffs",
    "NehariRoots",
    "SplitResult",
    "OffManifoldError",
    "BranchMissingError",
    "g_beta",
    "g_beta_profile",
    "g_beta_excess",
    "g_beta_offset",
    "g_max_profile",
    "fiber_coeffs",
    "nehari_times",
    "classify",
    "classify_coeffs",
    "project_to_nehari",
    "split_equal",
    "split_pair",
    "region_of",
]

ROOT_TOL = 1e-10


class NehariClass(str, enum.Enum):
    MINUS = "Minus"
    ZERO = "Zero"
    PLUS = "Plus"


class Region(str, enum.Enum):
    REGION1 = "Region1"
    REGION2 = "Region2"
    OUTSIDE = "Outside"


class OffManifoldError(ValueError):
    def __init__(self, defect: float, scale: float):
        super().__init__(f"pair is not on the Nehari manifold: defect {defect:.3e} (A = {scale:.3e})")
        self.defect = defect


@dataclass(frozen=True)
class FiberCoeffs:
    A: float
    B: float
    C: float
    p: float
    lam: float

    def h(self, t):
        t = np.asarray(t, dtype=float)
        return 0.5 * t**2 * self.A + 0.25 * self.lam * t**4 * self.B - t**self.p * self.C / self.p

    def hp(self, t):
        t = np.asarray(t, dtype=float)
        return t * self.A + self.lam * t**3 * self.B - t ** (self.p - 1) * self.C

    def hpp(self, t):
        t = np.asarray(t, dtype=float)
        return self.A + 3.0 * self.lam * t**2 * self.B - (self.p - 1) * t ** (self.p - 2) * self.C

    def nehari_defect(self) -> float:
        return self.A + self.lam * self.B - self.C

    def scaled(self, t: float) -> "FiberCoeffs":
        return FiberCoeffs(t * t * self.A, t**4 * self.B, t**self.p * self.C, self.p, self.lam)


@dataclass(frozen=True)
class NehariRoots:
    count: int
    t_minus: float | None = None
    t_plus: float | None = None
    class_minus: NehariClass | None = None
    class_plus: NehariClass | None = None

    def root(self, branch: NehariClass) -> float | None:
        if branch is NehariClass.MINUS:
            return self.t_minus if self.class_minus is NehariClass.MINUS else None
        if branch is NehariClass.PLUS:
            return self.t_plus if self.class_plus is NehariClass.PLUS else None
        if self.count == 1 and self.class_minus is NehariClass.ZERO:
            return self.t_minus
        return None


class BranchMissingError(ValueError):
    def __init__(self, branch: NehariClass, roots: NehariRoots):
        super().__init__(f"no {branch.value} Nehari scaling (found {roots.count} roots)")
        self.roots = roots


@dataclass(frozen=True)
class SplitResult:
    s_z: float
    energy_drop: float
    pair: VecPair


def g_beta(s, p: float, beta: float):
    s = np.asarray(s, dtype=float)
    q = 1.0 - s
    return s ** (0.5 * p) + q ** (0.5 * p) + 2.0 * beta * (s * q) ** (0.25 * p)


def _g_derivs(s: float, p: float, beta: float) -> tuple[float, float]:
    q = 1.0 - s
    a, b = 0.5 * p, 0.25 * p
    d1 = a * (s ** (a - 1) - q ** (a - 1)) + 2 * beta * b * (s ** (b - 1) * q**b - s**b * q ** (b - 1))
    d2 = a * (a - 1) * (s ** (a - 2) + q ** (a - 2)) + 2 * beta * b * (
        (b - 1) * s ** (b - 2) * q**b - 2 * b * s ** (b - 1) * q ** (b - 1) + (b - 1) * s**b * q ** (b - 2)
    )
    return d1, d2


def g_beta_excess(s, p: float, beta: float):
    """``g_beta(s) - 1`` without cancellation, for s in [0, 1/2]."""
    s = np.asarray(s, dtype=float)
    q = 1.0 - s
    return s ** (0.5 * p) + np.expm1(0.5 * p * np.log1p(-s)) + 2.0 * beta * (s * q) ** (0.25 * p)


def _offset_coeffs(p: float, beta: float, terms: int = 48) -> np.ndarray:
    """Coefficients c_j of ``g(1/2 + y/2) - g(1/2) = 2^{1-p/2} sum_j c_j y^{2j}``.

    From the binomial series of ``(1 +- y)^{p/2}`` and ``(1 - y^2)^{p/4}``:
    ``c_j = C(p/2, 2j) + beta (-1)^j C(p/4, j)``.  The first one is formed
    directly as ``(p/4)((p-2)/2 - beta)`` so its sign is exact.
    """
    a, b = 0.5 * p, 0.25 * p
    ca = np.empty(2 * terms + 1)
    ca[0] = 1.0
    for k in range(1, ca.size):
        ca[k] = ca[k - 1] * (a - k + 1) / k
    cb = np.empty(terms + 1)
    cb[0] = 1.0
    for j in range(1, cb.size):
        cb[j] = cb[j - 1] * (b - j + 1) / j
    j = np.arange(1, terms + 1)
    out = ca[2 * j] + beta * (-1.0) ** j * cb[j]
    out[0] = 0.25 * p * (0.5 * (p - 2.0) - beta)
    return out


def g_beta_offset(x, p: float, beta: float):
    """``g_beta(1/2 + x) - g_beta(1/2)`` without cancellation, for |x| < 1/2.

    Even binomial series in ``y = 2x`` for |y| <= 1/2; beyond that the
    closed form in ``z = atanh y`` (cosh, sinh^2 and expm1 pieces).
    """
    y = 2.0 * np.abs(np.asarray(x, dtype=float))
    a, b = 0.5 * p, 0.25 * p
    scale = 2.0 * 0.5**a
    y2 = y * y
    c = _offset_coeffs(p, beta)
    series = np.zeros_like(y2)
    for cj in c[::-1]:
        series = (series + cj) * y2
    with np.errstate(divide="ignore", invalid="ignore"):
        l1 = np.log1p(-y2)
        w = np.exp(0.5 * a * l1)
        closed = scale * (2.0 * np.sinh(0.5 * a * np.arctanh(y)) ** 2 * w + np.expm1(0.5 * a * l1)) \
            + 2.0 * beta * 0.5**a * np.expm1(b * l1)
    return np.where(y <= 0.5, scale * series, closed)


def _golden_log(f, lo: float, hi: float) -> float:
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = np.log(lo), np.log(hi)
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > 1e-12:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return float(np.exp(0.5 * (a + b)))


def _bracket(scan: np.ndarray, vals: np.ndarray) -> tuple[float, float, int]:
    k = int(np.argmax(vals))
    return scan[max(k - 1, 0)], scan[min(k + 1, scan.size - 1)], k


def _profile(p: float, beta: float) -> tuple[float, float]:
    # Two searches.  Near s = 0 the maximizer can sit at s ~ beta^{4/(4-p)},
    # far below any linear scan, so g - 1 is searched in log s.  Near 1/2
    # the maximum can be quartic-flat, so g(1/2 + x) - g(1/2) is searched in
    # log x; a scan with no positive offset means the maximizer is 1/2.
    geo = np.geomspace(1e-300, 1e-3, 3000)
    scan = np.unique(np.concatenate([np.linspace(0.0, 0.5, 2001)[1:], geo]))
    lo, hi, _ = _bracket(scan, g_beta_excess(scan, p, beta))
    s_low = _golden_log(lambda t: float(g_beta_excess(np.exp(t), p, beta)), lo, hi)
    for _ in range(20):
        d1, d2 = _g_derivs(s_low, p, beta)
        if d2 >= 0 or not np.isfinite(d2):
            break
        s_new = min(max(s_low - d1 / d2, lo), 0.5)
        if abs(s_new - s_low) <= 1e-16 * max(s_low, 1e-300):
            s_low = s_new
            break
        s_low = s_new
    e_low = float(g_beta_excess(s_low, p, beta))

    xs = np.unique(np.concatenate([np.linspace(0.0, 0.499, 2001)[1:], geo]))
    offs = g_beta_offset(xs, p, beta)
    x_best = 0.0
    if offs.max() > 0.0:
        xlo, xhi, _ = _bracket(xs, offs)
        x_best = _golden_log(lambda t: float(g_beta_offset(np.exp(t), p, beta)), xlo, xhi)
    e_mid = float(g_beta_excess(0.5, p, beta)) + max(float(g_beta_offset(x_best, p, beta)), 0.0)
    if s_low > 0.499 or e_mid >= e_low:
        return 0.5 - x_best, e_mid
    return s_low, e_low


def g_beta_profile(p: float, beta: float) -> tuple[float, float]:
    """Maximizer in [0, 1/2] and maximum of g_beta on [0, 1].

    g is symmetric about 1/2.  A scan (linear plus geometric near 0, where
    the cross term has infinite slope) brackets the maximizer, golden
    section in log s refines it, Newton on g' finishes.
    """
    s, excess = g_max_profile(p, beta)
    return s, 1.0 + excess


def g_max_profile(p: float, beta: float) -> tuple[float, float]:
    """Like ``g_beta_profile`` but returns ``g_max - 1``, accurate even when tiny."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta == 0.0:
        return 0.0, 0.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _profile(p, beta)


def fiber_coeffs(pair: VecPair, params: ModelParams) -> FiberCoeffs:
    br = _evaluate(pair.grid, pair.u.values, pair.v.values, params, grad=False)[0]
    if br.h_norm_sq == 0.0:
        raise ValueError("fibering coefficients need a nontrivial pair")
    return FiberCoeffs(br.h_norm_sq, br.hartree, br.coupling, params.p, params.lam)


def nehari_times(coeffs: FiberCoeffs, tol: float = ROOT_TOL) -> NehariRoots:
    A, lb, C, p = coeffs.A, coeffs.lam * coeffs.B, coeffs.C, coeffs.p
    if not A > 0:
        raise ValueError("nehari_times needs A > 0")
    if C <= 0:
        return NehariRoots(0)
    f = lambda t: A + lb * t * t - C * t ** (p - 2.0)
    if lb == 0.0:
        return NehariRoots(1, (A / C) ** (1.0 / (p - 2.0)), None, NehariClass.MINUS, None)
    t_star = ((p - 2.0) * C / (2.0 * lb)) ** (1.0 / (4.0 - p))
    f_star = f(t_star)
    if f_star > tol * A:
        return NehariRoots(0)
    if f_star >= -tol * A:
        return NehariRoots(1, t_star, None, NehariClass.ZERO, None)
    t_minus = brentq(f, 0.0, t_star, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    hi = 2.0 * t_star
    while f(hi) <= 0:
        hi *= 2.0
    t_plus = brentq(f, t_star, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    if p == 3.0:
        disc = np.sqrt(C * C - 4.0 * A * lb)
        q_minus = 2.0 * A / (C + disc)
        q_plus = (C + disc) / (2.0 * lb)
        if abs(q_minus - t_minus) > 1e-9 * q_minus or abs(q_plus - t_plus) > 1e-9 * q_plus:
            raise RuntimeError("Nehari root solver disagrees with the quadratic closed form")
    return NehariRoots(2, t_minus, t_plus, NehariClass.MINUS, NehariClass.PLUS)


def classify_coeffs(coeffs: FiberCoeffs, manifold_tol: float = ROOT_TOL, zero_tol: float = ROOT_TOL) -> NehariClass:
    A, B, C, p, lam = coeffs.A, coeffs.B, coeffs.C, coeffs.p, coeffs.lam
    defect = coeffs.nehari_defect()
    if abs(defect) > manifold_tol * A:
        raise OffManifoldError(defect, A)
    second = -(p - 2.0) * A + lam * (4.0 - p) * B
    if abs(second) <= zero_tol * A:
        return NehariClass.ZERO
    alt = -2.0 * A + (4.0 - p) * C
    if np.sign(alt) != np.sign(second):
        raise RuntimeError("the two second-derivative formulas disagree in sign")
    return NehariClass.MINUS if second < 0 else NehariClass.PLUS


def classify(pair: VecPair, params: ModelParams, tol: float = ROOT_TOL) -> NehariClass:
    return classify_coeffs(fiber_coeffs(pair, params), manifold_tol=tol, zero_tol=tol)


def project_to_nehari(pair: VecPair, params: ModelParams, branch: NehariClass) -> VecPair:
    roots = nehari_times(fiber_coeffs(pair, params))
    t = roots.root(branch)
    if t is None:
        raise BranchMissingError(branch, roots)
    return pair.scaled(t)


def split_pair(z: RadialFn, s: float) -> VecPair:
    return VecPair(z * np.sqrt(s), z * np.sqrt(1.0 - s))


def split_equal(z: RadialFn, params: ModelParams) -> SplitResult:
    """Spread a single profile over both components to lower the energy.

    The quadratic and Coulomb terms only see ``rho = z^2``, so
    ``J(sqrt(s) z, sqrt(1-s) z) = I(z) - (g_beta(s) - 1)/p int|z|^p``.
    """
    if params.beta <= 0:
        raise ValueError("splitting lowers the energy only for beta > 0")
    s, excess = g_max_profile(params.p, params.beta)
    drop = excess / params.p * lp_norm_pow(z, params.p)
    return SplitResult(s, drop, split_pair(z, s))


def region_of(pair: VecPair, params: ModelParams, consts: "SobolevConstants", tol: float = 1e-8) -> Region:
    """Place a Nehari pair below the energy cap in the small-norm or large-norm region."""
    coeffs = fiber_coeffs(pair, params)
    if abs(coeffs.nehari_defect()) > tol * coeffs.A or params.lam == 0.0:
        return Region.OUTSIDE
    p, lam = params.p, params.lam
    prod = consts.coulomb_product(params.kappa)
    cap = (p - 2.0) ** 2 * prod / (4.0 * lam * p * (4.0 - p))
    if float(coeffs.h(1.0)) >= cap:
        return Region.OUTSIDE
    radius = np.sqrt((p - 2.0) * prod / (lam * (4.0 - p)))
    region = Region.REGION1 if np.sqrt(coeffs.A) < radius else Region.REGION2
    cls = classify_coeffs(coeffs, manifold_tol=tol)
    expected = NehariClass.MINUS if region is Region.REGION1 else NehariClass.PLUS
    if cls is not expected:
        raise RuntimeError(f"{region.value} pair classified {cls.value}")
    return region
