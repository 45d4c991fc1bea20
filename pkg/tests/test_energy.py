import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nehari_lab.energy import (
    ModelParams,
    coercivity_lower_bound,
    coupling_integral,
    el_residual,
    pohozaev,
    pohozaev_general_solution,
    scalar_energy,
    total_energy,
)
from nehari_lab.fibering import fiber_coeffs
from nehari_lab.lambda_max import random_pairs
from nehari_lab.radial import RadialFn, VecPair, h1_norm_sq, integrate, lp_norm_pow, make_grid
from nehari_lab.soliton import scalar_ground_state


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.fixture(scope="module")
def soliton3(grid):
    return scalar_ground_state(3.0, 1.0, grid)


@pytest.fixture(scope="module")
def pairs(grid):
    return random_pairs(grid, 30, np.random.default_rng(21))


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(4.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(2.5, -1.0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(2.5, 1.0, -0.1)
    assert ModelParams(5.0, 1.0, 1.0, relaxed=True).p == 5.0


def test_coupling_integral(grid, pairs):
    zero = VecPair.from_arrays(grid, np.zeros(grid.n), np.zeros(grid.n))
    assert coupling_integral(zero, 3.0, 1.0) == 0.0
    pair = pairs[0]
    assert coupling_integral(pair, 2.5, 0.0) == lp_norm_pow(pair.u, 2.5) + lp_norm_pow(pair.v, 2.5)
    g = RadialFn(grid, np.exp(-grid.nodes**2 / 2))
    assert rel(coupling_integral(VecPair(g, g), 3.0, 1.0), 4 * (2 * np.pi / 3) ** 1.5) < 1e-4


def test_energy_identity(pairs):
    params = ModelParams(2.5, 0.7, 1.3)
    for pair in pairs:
        br = total_energy(pair, params)
        direct = 0.5 * (br.kinetic + br.mass) + 0.25 * params.lam * br.hartree - br.coupling / params.p
        assert br.total == pytest.approx(direct, rel=1e-14)


def test_semitrivial_equals_scalar(grid, pairs):
    params = ModelParams(2.5, 1.0, 1.0)
    for pair in pairs[:10]:
        j = total_energy(VecPair(pair.u, grid.zeros()), params).total
        assert rel(j, scalar_energy(pair.u, params)) < 1e-12
        assert rel(total_energy(VecPair(grid.zeros(), pair.u), params).total, j) < 1e-12
    assert scalar_energy(grid.zeros(), params) == 0.0


def test_decoupled_sum(grid, pairs):
    params = ModelParams(3.0, 0.0, 0.0)
    for pair in pairs[:10]:
        total = total_energy(pair, params).total
        assert rel(total, scalar_energy(pair.u, params) + scalar_energy(pair.v, params)) < 1e-12


def test_fibering_formula(pairs):
    params = ModelParams(2.5, 0.5, 1.0)
    for pair in pairs[:10]:
        co = fiber_coeffs(pair, params)
        for t in (0.5, 1.0, 2.0):
            assert rel(total_energy(pair.scaled(t), params).total, float(co.h(t))) < 1e-10


def test_nehari_defect(grid, pairs):
    params = ModelParams(2.5, 0.5, 1.0)
    for pair in pairs[:10]:
        res = el_residual(pair, params)
        co = fiber_coeffs(pair, params)
        defect = integrate(grid, res.res_u.values * pair.u.values + res.res_v.values * pair.v.values)
        assert rel(defect, co.A + co.lam * co.B - co.C) < 1e-10


def test_symmetries(pairs):
    params = ModelParams(2.5, 1.0, 1.0)
    for pair in pairs:
        j = total_energy(pair, params).total
        assert total_energy(pair.swapped(), params).total == j
        assert total_energy(abs(pair), params).total <= j + 1e-12 * abs(j)


def test_zero_residual(grid):
    zero = VecPair(grid.zeros(), grid.zeros())
    assert el_residual(zero, ModelParams(2.5, 1.0, 1.0)).norm == 0.0
    data = pohozaev(zero, ModelParams(2.5, 1.0, 1.0))
    assert (data.z1, data.z2, data.z3, data.z4, data.theta, data.poho_residual) == (0, 0, 0, 0, 0, 0)


def test_soliton_residual(grid, soliton3):
    w = soliton3.w
    res = el_residual(VecPair(w, grid.zeros()), ModelParams(3.0, 0.0, 0.0))
    assert res.norm < 1e-5 * np.sqrt(h1_norm_sq(w))


def test_soliton_scalar_energy(soliton3):
    w = soliton3.w
    assert rel(scalar_energy(w, ModelParams(3.0, 0.0, 0.0)), h1_norm_sq(w) / 6) < 1e-6


def test_soliton_pohozaev_refines(soliton3):
    params = ModelParams(3.0, 0.0, 0.0)
    fine = pohozaev(VecPair(soliton3.w, soliton3.w.grid.zeros()), params)
    coarse_grid = make_grid(2048, 30.0)
    w = scalar_ground_state(3.0, 1.0, coarse_grid).w
    coarse = pohozaev(VecPair(w, coarse_grid.zeros()), params)
    assert fine.poho_residual < 1e-4 * fine.z4
    assert fine.poho_residual < coarse.poho_residual


def test_pohozaev_anchor_system():
    z1, z2, z3, z4 = pohozaev_general_solution(1.0, 0.0, 3.0, 1.0)
    assert (z1, z2, z3, z4) == (3.0, 3.0, 0.0, 6.0)
    # energy, Nehari and Pohozaev at theta=1, p=3, lam=1
    assert 0.5 * (z1 + z2) + 0.25 * z3 - z4 / 3 == 1.0
    assert z1 + z2 + z3 - z4 == 0.0
    assert 0.5 * z1 + 1.5 * z2 + 1.25 * z3 - z4 == 0.0


@settings(max_examples=40, deadline=None)
@given(
    theta=st.floats(0.01, 100.0),
    t=st.floats(-10.0, 10.0),
    p=st.floats(2.05, 3.95),
    lam=st.floats(0.01, 10.0),
)
def test_general_solution_solves_system(theta, t, p, lam):
    z1, z2, z3, z4 = pohozaev_general_solution(theta, t, p, lam)
    scale = max(1.0, abs(theta), abs(t) * (1 + 1 / lam)) * 10
    assert abs(0.5 * (z1 + z2) + 0.25 * lam * z3 - z4 / p - theta) < 1e-13 * scale
    assert abs(z1 + z2 + lam * z3 - z4) < 1e-13 * scale
    assert abs(0.5 * z1 + 1.5 * z2 + 1.25 * lam * z3 - 3 * z4 / p) < 1e-13 * scale


def test_coercivity_bound(grid):
    params = ModelParams(2.5, 1.0, 1.0)
    for pair in random_pairs(grid, 1000, np.random.default_rng(22)):
        assert total_energy(pair, params).total >= coercivity_lower_bound(pair, params)
