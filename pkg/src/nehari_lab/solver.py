"""Critical points of the energy: global minimizer and minus-branch Nehari minimizer.

Both solvers run preconditioned descent (see ``descent``) and finish with a
Newton-Krylov polish of the discrete Euler-Lagrange system, which brings the
L^2 residual from the descent level (~1e-6) to rounding level.  The polish is
preconditioned by ``(-Delta + 1)^{-1}`` and accepted only if it keeps the
iterate nonnegative and on the requested branch.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import newton_krylov, NoConvergence
from scipy.sparse.linalg import LinearOperator

from .descent import RetractionError, descend, h1_inner, precondition
from .energy import (
    EnergyBreakdown,
    ModelParams,
    PohozaevData,
    _evaluate,
    el_residual,
    pohozaev,
)
from .fibering import (
    BranchMissingError,
    FiberCoeffs,
    NehariClass,
    NehariRoots,
    classify_coeffs,
    fiber_coeffs,
    nehari_times,
    project_to_nehari,
    split_equal,
)
from .radial import RadialGrid, VecPair, l2_norm_sq
from .soliton import SobolevConstants, soliton_pair
from .thresholds import P_G3, energy_cap_ground, lambda0

__all__ = [
    "SolverConfig",
    "SolveReport",
    "CertificateSource",
    "BranchLostError",
    "minimize_global",
    "minimize_nehari_minus",
    "certify_ground_state",
    "build_report",
]


# the global flow is declared divergent once ||x||_H^2 exceeds this multiple of its start
DIVERGENCE_RATIO = 1e8


class CertificateSource(str, enum.Enum):
    T6 = "t6"
    G3 = "g3"
    NONE = "none"


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 20000
    step0: float = 1.0
    tol_residual: float = 1e-6
    tol_energy: float = 1e-15
    seed: int = 0

    def __post_init__(self):
        for name in ("max_iters", "step0", "tol_residual", "tol_energy"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass(frozen=True)
class SolveReport:
    mode: str
    pair: VecPair
    breakdown: EnergyBreakdown
    residual: float
    nehari_class: NehariClass | None
    poho: PohozaevData
    vectorial: bool
    positive: bool
    nonnegative: bool
    converged: bool
    trivial_limit: bool
    iterations: int
    nehari_defect: float
    uv_asymmetry: float
    certified_ground_state: bool = False
    certificate_source: CertificateSource = CertificateSource.NONE
    notes: tuple = field(default_factory=tuple)


class BranchLostError(RuntimeError):
    def __init__(self, message: str, last: VecPair, roots: NehariRoots):
        super().__init__(message)
        self.last = last
        self.roots = roots


def _stack(pair: VecPair) -> np.ndarray:
    return np.vstack([pair.u.values, pair.v.values])


def _pair(grid: RadialGrid, x: np.ndarray) -> VecPair:
    return VecPair.from_arrays(grid, x[0], x[1])


def _energy_and_grad(grid: RadialGrid, params: ModelParams):
    def evaluate(x):
        br, ru, rv = _evaluate(grid, x[0], x[1], params)
        return br.total, np.vstack([ru, rv])

    return evaluate


def _clean(y: np.ndarray) -> np.ndarray:
    y = np.abs(y)
    y[:, -1] = 0.0
    return y


def _is_vectorial(pair: VecPair) -> bool:
    nu, nv = np.sqrt(l2_norm_sq(pair.u)), np.sqrt(l2_norm_sq(pair.v))
    return bool(min(nu, nv) > 1e-3 * (nu + nv)) if nu + nv > 0 else False


def _is_positive(pair: VecPair) -> bool:
    inner = pair.grid.nodes < 0.5 * pair.grid.r_max
    return bool(pair.u.values[inner].min() > 0 and pair.v.values[inner].min() > 0)


def _semitrivial(pair: VecPair) -> bool:
    return not pair.is_trivial and not _is_vectorial(pair)


def build_report(mode: str, pair: VecPair, params: ModelParams, iterations: int, converged_descent: bool,
                 config: SolverConfig, trivial: bool = False, notes=()) -> SolveReport:
    grid = pair.grid
    res = el_residual(pair, params)
    br = _evaluate(grid, pair.u.values, pair.v.values, params, grad=False)[0]
    cls = None
    defect = 0.0
    if not trivial and br.h_norm_sq > 0:
        co = FiberCoeffs(br.h_norm_sq, br.hartree, br.coupling, params.p, params.lam)
        defect = co.nehari_defect() / co.A
        try:
            cls = classify_coeffs(co, manifold_tol=1e-8)
        except ValueError:
            cls = None
    converged = bool(trivial or res.norm <= config.tol_residual)
    diff = np.sqrt(l2_norm_sq(pair.u + pair.v * -1.0))
    total = np.sqrt(l2_norm_sq(pair.u + pair.v))
    return SolveReport(
        mode=mode, pair=pair, breakdown=br, residual=res.norm, nehari_class=cls,
        poho=pohozaev(pair, params), vectorial=_is_vectorial(pair), positive=_is_positive(pair),
        nonnegative=bool(pair.u.values.min() >= 0 and pair.v.values.min() >= 0),
        converged=converged, trivial_limit=trivial, iterations=iterations, nehari_defect=float(defect),
        uv_asymmetry=float(diff / total) if total > 0 else 0.0, notes=tuple(notes),
    )


def _polish(grid: RadialGrid, x: np.ndarray, params: ModelParams, tol: float) -> np.ndarray | None:
    """Newton-Krylov on the residual; None if it fails or leaves the nonnegative cone."""
    n = grid.n

    def F(flat):
        y = flat.reshape(2, n)
        _, ru, rv = _evaluate(grid, y[0], y[1], params)
        out = np.vstack([ru, rv])
        out[:, -1] = y[:, -1]
        return out.ravel()

    def apply_m(flat):
        return precondition(grid, flat.reshape(2, n)).ravel()

    m = LinearOperator((2 * n, 2 * n), matvec=apply_m, dtype=float)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            sol = newton_krylov(F, x.ravel(), inner_M=m, f_tol=tol, maxiter=40, method="gmres")
    except (NoConvergence, ValueError, FloatingPointError):
        return None
    y = sol.reshape(2, n)
    scale = np.abs(x).max()
    if y.min() < -1e-10 * scale:
        return None
    return _clean(y)


def _finish(grid, x, params, config):
    """Polish a descent result if needed; returns (x, polished)."""
    pair = _pair(grid, x)
    if el_residual(pair, params).norm <= 1e-2 * config.tol_residual:
        return x, False
    scale = max(1.0, np.abs(x).max())
    # max-norm targets; the smallest ones sit near rounding at the first nodes
    for tol in (1e-10, 1e-9, 1e-8):
        y = _polish(grid, x, params, tol=tol * scale)
        if y is not None:
            return y, True
    return x, False


def minimize_global(params: ModelParams, grid: RadialGrid, config: SolverConfig = SolverConfig(),
                    init: VecPair | None = None) -> SolveReport:
    """Descent on J from the large-scale split soliton, nonnegative throughout."""
    notes = []
    if init is None:
        seed_pair, _ = soliton_pair(params.p, params.beta, grid)
        try:
            init = project_to_nehari(seed_pair, params, NehariClass.PLUS)
            notes.append("seed: split soliton at the plus scaling")
        except BranchMissingError:
            init = seed_pair
            notes.append("seed: split soliton (no plus scaling)")
    evaluate = _energy_and_grad(grid, params)
    x0 = _stack(init)
    norm0 = h1_inner(grid, x0, x0)

    def stop(x, f):
        norm = h1_inner(grid, x, x)
        return norm < 1e-16 * norm0 or norm > DIVERGENCE_RATIO * norm0

    res = descend(grid, x0, evaluate, _clean, max_iter=config.max_iters, gtol=1e-7,
                  ftol=config.tol_energy, step0=config.step0, stop=stop)
    iterations = res.iterations
    x = res.x
    if h1_inner(grid, x, x) > DIVERGENCE_RATIO * norm0:
        notes.append("energy unbounded below along the flow; norm grew past the divergence cap")
        return build_report("global", _pair(grid, x), params, iterations, False, config, notes=notes)
    if h1_inner(grid, x, x) < 1e-12 * norm0:
        notes.append("flow collapsed to the zero pair")
        zero = np.zeros_like(x)
        return build_report("global", _pair(grid, zero), params, iterations, True, config, trivial=True, notes=notes)
    x, polished = _finish(grid, x, params, config)
    if polished:
        notes.append("newton-krylov polish")
    pair = _pair(grid, x)
    if params.beta > 0 and _semitrivial(pair):
        nonzero = pair.u if l2_norm_sq(pair.u) >= l2_norm_sq(pair.v) else pair.v
        notes.append("semitrivial output split and re-descended")
        split = split_equal(nonzero, params).pair
        report = minimize_global(params, grid, config, init=split)
        return replace(report, iterations=report.iterations + iterations, notes=tuple(notes) + report.notes)
    return build_report("global", pair, params, iterations, res.converged, config, notes=notes)


def _minus_retraction(grid: RadialGrid, params: ModelParams, state: dict):
    def retract(y):
        y = _clean(y)
        pair = _pair(grid, y)
        if pair.is_trivial:
            raise RetractionError("trivial trial point")
        roots = nehari_times(fiber_coeffs(pair, params))
        t = roots.root(NehariClass.MINUS)
        if t is None:
            state["roots"] = roots
            raise RetractionError("minus branch absent")
        out = t * y
        state["last"] = out
        return out

    return retract


def minimize_nehari_minus(params: ModelParams, grid: RadialGrid, config: SolverConfig = SolverConfig(),
                          init: VecPair | None = None, _restarted: bool = False) -> SolveReport:
    """Minimize J over the minus branch of the Nehari manifold.

    Each trial point is projected onto its minus Nehari scaling, so the
    objective is ``y -> J(t_minus(y) y)`` whose gradient on the manifold is
    the energy gradient itself.
    """
    notes = []
    if init is None:
        init, _ = soliton_pair(params.p, params.beta, grid)
        notes.append("seed: split soliton at the minus scaling")
    state: dict = {}
    retract = _minus_retraction(grid, params, state)
    try:
        x0 = retract(_stack(init))
    except RetractionError as exc:
        raise BranchLostError("initial pair has no minus Nehari scaling", init,
                              state.get("roots", NehariRoots(0))) from exc
    evaluate = _energy_and_grad(grid, params)
    res = descend(grid, x0, evaluate, retract, max_iter=config.max_iters, gtol=1e-7,
                  ftol=config.tol_energy, step0=config.step0)
    if res.stalled and res.iterations == 0:
        last = _pair(grid, state.get("last", x0))
        raise BranchLostError("minus branch lost along every trial step", last, state.get("roots", NehariRoots(0)))
    x, polished = _finish(grid, res.x, params, config)
    if polished:
        notes.append("newton-krylov polish")
        co = fiber_coeffs(_pair(grid, x), params)
        try:
            if classify_coeffs(co, manifold_tol=1e-8) is not NehariClass.MINUS:
                x = res.x
                notes.append("polish left the minus branch; kept descent iterate")
        except ValueError:
            x = res.x
    pair = _pair(grid, x)
    if params.beta > 0 and _semitrivial(pair) and not _restarted:
        nonzero = pair.u if l2_norm_sq(pair.u) >= l2_norm_sq(pair.v) else pair.v
        split = split_equal(nonzero, params).pair
        notes.append("semitrivial output rejected; restarted from its split")
        report = minimize_nehari_minus(params, grid, config, init=split, _restarted=True)
        return replace(report, iterations=report.iterations + res.iterations, notes=tuple(notes) + report.notes)
    return build_report("nehari-minus", pair, params, res.iterations, res.converged, config, notes=notes)


def certify_ground_state(report: SolveReport, params: ModelParams, consts: SobolevConstants) -> SolveReport:
    """Attach the certificate that makes a minus-branch minimizer a ground state."""
    if not report.converged or report.trivial_limit:
        return replace(report, certified_ground_state=False, certificate_source=CertificateSource.NONE)
    p = params.p
    if p >= P_G3:
        return replace(report, certified_ground_state=True, certificate_source=CertificateSource.G3)
    if 3.0 <= p < 4.0 and 0 < params.lam < lambda0(p, consts, params.kappa) \
            and report.breakdown.total < energy_cap_ground(p, consts):
        return replace(report, certified_ground_state=True, certificate_source=CertificateSource.T6)
    return replace(report, certified_ground_state=False, certificate_source=CertificateSource.NONE)
