"""Closed-form thresholds built from the embedding constants.

Wherever a bound rests on ``int phi rho <= K ||(u,v)||_H^4`` the product
``S_bar^2 S_125^4`` stands for ``1/K``.  That product is taken from
``SobolevConstants.coulomb_product(kappa)``, which carries the kernel
prefactor, so every bound below is valid for the energy actually evaluated.
Thresholds on lambda that come from the sharp HLS constant of ``1/|x|``
scale as ``1/kappa``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .energy import ModelParams, pohozaev
from .fibering import NehariClass, classify_coeffs, fiber_coeffs
from .radial import VecPair
from .soliton import SobolevConstants

__all__ = [
    "P_G3",
    "ThresholdReport",
    "T6Certificate",
    "G3Certificate",
    "rho_p",
    "k_of_lambda",
    "beta0",
    "beta_threshold",
    "lambda0",
    "lambda0_from_a",
    "a_hls",
    "c_p_beta",
    "c_beta",
    "region_radius",
    "energy_cap_region",
    "energy_cap_ground",
    "g5_lower_bound",
    "compute_thresholds",
    "t6_lhs",
    "prop_t6_certificate",
    "prop_g3_certificate",
    "g3_second_derivative",
]

P_G3 = (1.0 + np.sqrt(73.0)) / 3.0


def _check_p(p: float, upper: float = 4.0) -> None:
    if not 2.0 < p < upper:
        raise ValueError(f"exponent p must lie in (2, {upper:g}), got {p}")


def rho_p(p: float, consts: SobolevConstants, kappa: float = 1.0) -> float:
    _check_p(p)
    return (p - 2.0) * consts.coulomb_product(kappa) / (2.0 * (4.0 - p) * consts.ground_power)


def k_of_lambda(lam: float, p: float, consts: SobolevConstants, kappa: float = 1.0) -> float:
    rp = rho_p(p, consts, kappa)
    return rp if lam < rp else lam


def beta0(lam: float, p: float, consts: SobolevConstants, kappa: float = 1.0) -> float:
    _check_p(p)
    base = lam * p * consts.ground_power / ((p - 2.0) * consts.coulomb_product(kappa))
    value = base ** ((p - 2.0) / 2.0) * (p / (4.0 - p)) ** ((4.0 - p) / 2.0) - 1.0
    return max((p - 2.0) / 2.0, value)


def beta_threshold(lam: float, p: float, consts: SobolevConstants, kappa: float = 1.0) -> float:
    _check_p(p)
    sp = consts.ground_power
    prod = consts.coulomb_product(kappa)
    if lam < rho_p(p, consts, kappa):
        inner = 1.0 + np.sqrt(1.0 + 2.0 * p * sp / ((p - 2.0) * prod) * (2.0 / (4.0 - p)) ** (4.0 / (p - 2.0)) * lam)
    else:
        root = np.sqrt(1.0 + p * 2.0 ** (4.0 / (p - 2.0)) / (4.0 - p) ** ((p + 2.0) / (p - 2.0)))
        inner = 2.0 * (4.0 - p) * sp / ((p - 2.0) * prod) * (1.0 + root) * lam
    return max((p - 2.0) / 2.0, inner ** ((p - 2.0) / 2.0) - 1.0)


def lambda0(p: float, consts: SobolevConstants, kappa: float = 1.0) -> float:
    """Printed closed form, divided by kappa."""
    _check_p(p)
    num = 6.0 * p * np.sqrt(3.0 * p) * (p - 2.0) * np.pi
    den = 8.0 * 2.0 ** (1.0 / 3.0) * (4.0 - p) * (6.0 - p) ** 1.5 * consts.ground_power
    return num / den / kappa


def a_hls(p: float, kappa: float = 1.0) -> float:
    _check_p(p, 6.0)
    return kappa**2 * (16.0 * 2.0 ** (1.0 / 3.0) / (3.0 * np.sqrt(3.0) * np.pi)) ** 2 * ((6.0 - p) / (p - 2.0)) ** 3


def lambda0_from_a(p: float, consts: SobolevConstants, kappa: float = 1.0) -> float:
    """Largest lambda for which the level-theta bound holds up to the energy cap."""
    return 4.0 * p / ((4.0 - p) * (p - 2.0) * consts.ground_power) * np.sqrt(p * (p - 2.0) / a_hls(p, kappa))


def c_p_beta(p: float, beta: float) -> float:
    if not 2.0 < p < 3.0:
        raise ValueError(f"C_p_beta needs 2 < p < 3, got {p}")
    return (p - 2.0) * (2.0 * (3.0 - p)) ** ((3.0 - p) / (p - 2.0)) * ((1.0 + beta) / p) ** (1.0 / (p - 2.0))


def c_beta(p: float, beta: float, consts: SobolevConstants) -> float:
    """``(1+beta) S_p^{-p}``: Young on the cross term, then Sobolev."""
    return (1.0 + beta) * consts.S_p ** (-p)


def region_radius(lam: float, p: float, consts: SobolevConstants, kappa: float = 1.0) -> float:
    return float(np.sqrt((p - 2.0) * consts.coulomb_product(kappa) / (lam * (4.0 - p))))


def energy_cap_region(lam: float, p: float, consts: SobolevConstants, kappa: float = 1.0) -> float:
    k = k_of_lambda(lam, p, consts, kappa)
    return (p - 2.0) ** 2 * consts.coulomb_product(kappa) / (4.0 * p * (4.0 - p) * k)


def energy_cap_ground(p: float, consts: SobolevConstants) -> float:
    return (p - 2.0) / (2.0 * p) * consts.ground_power


def g5_lower_bound(p: float, beta: float, consts: SobolevConstants) -> float:
    return (p - 2.0) / (4.0 * p) * c_beta(p, beta, consts) ** (-1.0 / (p - 2.0))


@dataclass(frozen=True)
class ThresholdReport:
    p: float
    lam: float
    beta: float
    kappa: float
    rho_p: float
    k_lambda: float
    beta0: float
    beta_thresh: float
    lambda0: float
    lambda0_rederived: float
    lambda0_agrees: bool
    C_p_beta: float | None
    C_beta: float
    A_hls: float
    region_radius: float
    energy_cap_region: float
    energy_cap_ground: float
    p_g3: float
    g5_lower: float
    coulomb_product: float

    def as_dict(self) -> dict:
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out


def compute_thresholds(p: float, lam: float, beta: float, consts: SobolevConstants, kappa: float = 1.0) -> ThresholdReport:
    _check_p(p)
    if not lam > 0:
        raise ValueError(f"thresholds need lambda > 0, got {lam}")
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    l0 = lambda0(p, consts, kappa)
    l0b = lambda0_from_a(p, consts, kappa)
    return ThresholdReport(
        p=p, lam=lam, beta=beta, kappa=kappa,
        rho_p=rho_p(p, consts, kappa),
        k_lambda=k_of_lambda(lam, p, consts, kappa),
        beta0=beta0(lam, p, consts, kappa),
        beta_thresh=beta_threshold(lam, p, consts, kappa),
        lambda0=l0,
        lambda0_rederived=l0b,
        lambda0_agrees=bool(abs(l0 - l0b) <= 1e-10 * abs(l0)),
        C_p_beta=c_p_beta(p, beta) if p < 3.0 else None,
        C_beta=c_beta(p, beta, consts),
        A_hls=a_hls(p, kappa),
        region_radius=region_radius(lam, p, consts, kappa),
        energy_cap_region=energy_cap_region(lam, p, consts, kappa),
        energy_cap_ground=energy_cap_ground(p, consts),
        p_g3=P_G3,
        g5_lower=g5_lower_bound(p, beta, consts),
        coulomb_product=consts.coulomb_product(kappa),
    )


@dataclass(frozen=True)
class T6Certificate:
    accepted: bool
    lhs: float
    rhs: float
    lhs_below_rhs: bool


def t6_lhs(theta: float, lam: float, p: float, kappa: float = 1.0) -> float:
    a = a_hls(p, kappa)
    return a * lam**2 * (4.0 - p) * theta**2 + lam**2 * np.sqrt(
        a**2 * (4.0 - p) ** 2 * theta**4 + 32.0 * p * (p - 2.0) * a * theta**2 / lam**2
    )


def prop_t6_certificate(theta: float, lam: float, p: float, consts: SobolevConstants, kappa: float = 1.0) -> T6Certificate:
    """Whether every solution at level theta is forced onto the minus branch."""
    if not 3.0 <= p < 4.0:
        raise ValueError(f"this certificate needs 3 <= p < 4, got {p}")
    lhs = float(t6_lhs(theta, lam, p, kappa))
    rhs = 16.0 * p * (p - 2.0) / (4.0 - p)
    accepted = bool(0.0 < lam < lambda0(p, consts, kappa) and 0.0 < theta < energy_cap_ground(p, consts))
    return T6Certificate(accepted, lhs, rhs, bool(lhs < rhs))


def g3_second_derivative(p: float, lam: float, z2: float, z3: float) -> float:
    """h''(1) rewritten with the Nehari and Pohozaev relations (valid at solutions)."""
    return -(2.0 * p * (p - 2.0) / (6.0 - p)) * z2 - lam * (3.0 * p * p - 2.0 * p - 24.0) / (2.0 * (6.0 - p)) * z3


@dataclass(frozen=True)
class G3Certificate:
    accepted: bool
    zero_margin: bool
    second_derivative: float
    agrees_with_classify: bool


def prop_g3_certificate(pair: VecPair, params: ModelParams, residual_tol: float = 1e-5) -> G3Certificate:
    """For p >= (1+sqrt 73)/3 every nontrivial solution lies on the minus branch."""
    from .energy import el_residual

    res = el_residual(pair, params)
    coeffs = fiber_coeffs(pair, params)
    if res.norm > residual_tol * np.sqrt(coeffs.A):
        raise ValueError(f"pair is not a solution (residual {res.norm:.3e})")
    data = pohozaev(pair, params)
    second = g3_second_derivative(params.p, params.lam, data.z2, data.z3)
    poly = 3.0 * params.p**2 - 2.0 * params.p - 24.0
    zero_margin = abs(poly) < 1e-12
    accepted = params.p >= P_G3 or zero_margin
    cls = classify_coeffs(coeffs, manifold_tol=1e-6)
    agrees = (second < 0) == (cls is NehariClass.MINUS)
    return G3Certificate(bool(accepted), bool(zero_margin), float(second), bool(agrees))
