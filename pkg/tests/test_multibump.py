import numpy as np
import pytest

from nehari_lab.coulomb import newton_potential
from nehari_lab.energy import ModelParams, total_energy
from nehari_lab.multibump import (
    BumpConfig,
    bump_coeffs,
    bump_config,
    bump_curve,
    bump_energy,
    cutoff,
    eta,
    single_bump,
    truncate,
)
from nehari_lab.radial import RadialFn, VecPair, h1_norm_sq, lp_norm_pow, make_grid
from nehari_lab.soliton import scalar_ground_state, sobolev_constants
from nehari_lab.thresholds import beta0


@pytest.fixture(scope="module")
def setup(grid):
    consts = sobolev_constants(2.5, grid)
    params = ModelParams(2.5, 1.0, 2.0 * beta0(1.0, 2.5, consts))
    return params, consts


def test_cutoff_shape():
    R0 = 3.0
    r = np.linspace(0, 5, 50001)
    psi = cutoff(r, R0)
    assert np.all(psi[r <= R0 / 2] == 1.0) and np.all(psi[r >= R0] == 0.0)
    slope = np.abs(np.diff(psi) / np.diff(r))
    assert slope.max() <= 3.0 / R0 + 1e-9
    # C^1: the slope vanishes at both junctions
    assert slope[np.searchsorted(r, R0 / 2)] < 1e-3 and slope[np.searchsorted(r, R0) - 1] < 1e-3


def test_truncation(grid):
    w = scalar_ground_state(2.5, 1.0, grid).w
    u = truncate(w, 3.0)
    assert not u.values[grid.nodes >= 3.0].any()
    pints = [lp_norm_pow(truncate(w, R), 2.5) for R in (2.0, 3.0, 5.0, 8.0, 12.0)]
    assert np.all(np.diff(pints) >= 0)
    with pytest.raises(ValueError):
        truncate(w, 0.5 * grid.r_max)


def test_truncation_converges():
    # the cutoff starts at R0/2, so a longer grid is needed to push R0 out
    long = make_grid(4096, 40.0)
    w = scalar_ground_state(2.5, 1.0, long).w
    norm = np.sqrt(h1_norm_sq(w))
    gaps = [abs(np.sqrt(h1_norm_sq(truncate(w, R))) - norm) for R in (6.0, 10.0, 14.0, 19.9)]
    assert np.all(np.diff(gaps) < 0) and gaps[-1] < 1e-6


def test_single_bump_energy(setup, grid):
    params, _ = setup
    u, s, _ = single_bump(params, 3.0, grid)
    cfg = bump_config(params, 3.0, 1, grid)
    pair = VecPair(u * np.sqrt(s), u * np.sqrt(1 - s))
    for t in (0.5, 1.0, 3.0):
        direct = total_energy(pair.scaled(t), params).total
        assert bump_energy(params, cfg, t) == pytest.approx(direct, rel=1e-10)


def test_two_bump_hartree(setup, grid):
    params, _ = setup
    cfg = bump_config(params, 3.0, 2, grid)
    assert cfg.spacing == 8.0
    u, _, _ = single_bump(params, 3.0, grid)
    # the potential of one cluster evaluated at the other's center, via the radial solver
    # r * phi is constant outside the support, so linear interpolation of it is exact there
    field = newton_potential(RadialFn(grid, u.values**2), params.kappa)
    r_phi = np.interp(8.0, grid.nodes, grid.nodes * field.phi.values)
    oracle = 2 * cfg.hartree_self + 2 * cfg.q * r_phi / 8.0
    B = bump_coeffs(params, cfg).B
    assert B == pytest.approx(2 * cfg.hartree_self + 2 * params.kappa * cfg.q**2 / 8, rel=1e-14)
    assert B == pytest.approx(oracle, rel=1e-10)


def test_additivity(setup, grid):
    params, _ = setup
    one = bump_coeffs(params, bump_config(params, 3.0, 1, grid))
    for N in (2, 4, 8):
        cfg = bump_config(params, 3.0, N, grid)
        co = bump_coeffs(params, cfg)
        assert co.A == N * one.A and co.C == N * one.C
        single = BumpConfig(cfg.R0, 1, 1.0, cfg.q, cfg.h1_sq, cfg.p_integral, cfg.hartree_self, cfg.g, cfg.s)
        for t in (0.7, 1.5, 4.0):
            assert eta(cfg, 2.5, t) == pytest.approx(N * eta(single, 2.5, t), rel=1e-14)


def test_overlap_rejected(setup, grid):
    params, _ = setup
    with pytest.raises(ValueError):
        bump_config(params, 4.0, 2, grid)


def test_curve(setup, grid):
    params, consts = setup
    curve = bump_curve(params, 3.0, (1, 2, 4, 8), consts, grid)
    J = np.array(curve.energies)
    assert curve.condition_67 and all(curve.brackets)
    assert np.all(np.diff(J) < 0) and J[-1] < 0
    assert all(c <= b for c, b in zip(curve.cross_terms, curve.bounds))
    assert np.all(np.diff(curve.bounds[1:]) < 0)
    assert curve.spacings == (1.0, 8.0, 64.0, 512.0)
    per_bump = np.abs(J / np.array(curve.Ns) - curve.single_bump_energy)
    assert np.all(np.diff(per_bump[1:]) < 0)


def test_curve_preconditions(setup, grid):
    params, consts = setup
    b0 = beta0(1.0, 2.5, consts)
    with pytest.raises(ValueError):
        bump_curve(params.with_(beta=b0), 3.0, (1, 2), consts, grid)
    # just above beta0 the single-bump condition cannot be met with disjoint bumps
    with pytest.raises(RuntimeError):
        bump_curve(params.with_(beta=1.01 * b0), 3.0, (1, 2, 4, 8), consts, grid)
