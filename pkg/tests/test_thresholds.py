import numpy as np
import pytest

from nehari_lab.energy import ModelParams, el_residual
from nehari_lab.radial import VecPair
from nehari_lab.soliton import scalar_ground_state, sobolev_constants
from nehari_lab.thresholds import (
    P_G3,
    beta0,
    beta_threshold,
    c_p_beta,
    compute_thresholds,
    energy_cap_ground,
    k_of_lambda,
    lambda0,
    lambda0_from_a,
    prop_g3_certificate,
    prop_t6_certificate,
    rho_p,
)

LAMBDAS = np.geomspace(1e-4, 1e2, 25)
PS = (2.2, 2.5, 2.8, 3.0, 3.3, 3.7)


@pytest.fixture(scope="module")
def consts(grid):
    return {p: sobolev_constants(p, grid) for p in PS}


def test_young_constant_value():
    assert c_p_beta(2.5, 0.0) == pytest.approx(0.08, abs=1e-16)
    with pytest.raises(ValueError):
        c_p_beta(3.0, 0.0)


def test_k_piecewise(consts):
    c = consts[2.5]
    rp = rho_p(2.5, c)
    assert k_of_lambda(rp / 2, 2.5, c) == rp
    assert k_of_lambda(2 * rp, 2.5, c) == 2 * rp


def test_beta_orderings(consts):
    for p in PS:
        c = consts[p]
        floor = (p - 2) / 2
        b = [beta_threshold(lam, p, c) for lam in LAMBDAS]
        b0 = [beta0(lam, p, c) for lam in LAMBDAS]
        assert min(b) >= floor
        assert np.all(np.diff(b) >= 0) and np.all(np.diff(b0) >= 0)
        for x, y in zip(b, b0):
            assert x >= y
            if x > floor:
                assert x > y


def test_report_fields(consts):
    for p in PS:
        rep = compute_thresholds(p, 0.3, 1.0, consts[p])
        d = rep.as_dict()
        for key in ("rho_p", "k_lambda", "beta0", "lambda0", "C_beta", "A_hls", "region_radius",
                    "energy_cap_region", "energy_cap_ground"):
            assert d[key] > 0 and np.isfinite(d[key])
        assert rep.beta_thresh >= (p - 2) / 2
        assert rep.lambda0_agrees
        assert (rep.C_p_beta is None) == (p >= 3)
        assert rep.p_g3 == pytest.approx((1 + np.sqrt(73)) / 3, rel=1e-15)


def test_report_rejects_bad_input(consts):
    with pytest.raises(ValueError):
        compute_thresholds(2.5, 0.0, 1.0, consts[2.5])
    with pytest.raises(ValueError):
        compute_thresholds(4.0, 1.0, 1.0, consts[2.5])


def test_lambda0_two_routes(consts):
    for p in (3.0, 3.3, 3.7):
        assert lambda0(p, consts[p]) == pytest.approx(lambda0_from_a(p, consts[p]), rel=1e-10)


def test_t6_example(consts):
    c = consts[3.0]
    cap = energy_cap_ground(3.0, c)
    l0 = lambda0(3.0, c)
    cert = prop_t6_certificate(cap / 2, l0 / 2, 3.0, c)
    assert cert.accepted and cert.rhs == 48.0 and cert.lhs < 48.0
    assert not prop_t6_certificate(cap / 2, l0, 3.0, c).accepted
    assert not prop_t6_certificate(cap, l0 / 2, 3.0, c).accepted
    with pytest.raises(ValueError):
        prop_t6_certificate(cap / 2, l0 / 2, 2.5, c)


def test_t6_bound_is_tight_at_lambda0(consts):
    """At theta = cap and lambda = lambda0 the two sides meet."""
    c = consts[3.3]
    cert = prop_t6_certificate(energy_cap_ground(3.3, c), lambda0(3.3, c), 3.3, c)
    assert cert.lhs == pytest.approx(cert.rhs, rel=1e-10)


def _scalar_solution(p, grid):
    params = ModelParams(p, 0.0, 0.0)
    w = scalar_ground_state(p, 1.0, grid).w
    return VecPair(w, grid.zeros()), params


@pytest.mark.parametrize("p, accepted", [(3.5, True), (3.0, False), (P_G3, True)])
def test_g3_certificate(grid, p, accepted):
    pair, params = _scalar_solution(p, grid)
    cert = prop_g3_certificate(pair, params)
    assert cert.accepted is accepted
    assert cert.zero_margin == bool(p == P_G3)
    assert cert.second_derivative < 0 and cert.agrees_with_classify


def test_g3_identity_sign():
    from nehari_lab.thresholds import g3_second_derivative

    rng = np.random.default_rng(51)
    for z2, z3, lam in rng.uniform(0.01, 10, size=(100, 3)):
        assert g3_second_derivative(3.5, lam, z2, z3) < 0


def test_g3_rejects_non_solution(grid):
    from nehari_lab.lambda_max import random_pairs

    pair = random_pairs(grid, 1, np.random.default_rng(52), nonneg=True)[0]
    with pytest.raises(ValueError):
        prop_g3_certificate(pair, ModelParams(3.5, 0.1, 1.0))


def test_scalar_solution_residual_is_small(grid):
    pair, params = _scalar_solution(3.5, grid)
    assert el_residual(pair, params).norm < 1e-8
