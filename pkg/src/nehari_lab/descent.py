"""Preconditioned steepest descent shared by the solvers and the quotient search.

Directions are H^1 Riesz representatives of the L^2 gradient field, i.e.
``(-Delta + 1) d = grad``; without this the three-point Laplacian makes plain
L^2 descent stall on fine grids.  Step lengths start from the Barzilai-Borwein
estimate and are accepted by Armijo backtracking, so accepted steps never
increase the objective.  A ``retract`` callback maps trial points back to the
admissible set (absolute values, Nehari projection, normalization).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .radial import FOUR_PI, RadialGrid, solve_shifted_stiffness, stiffness_apply

__all__ = ["DescentResult", "RetractionError", "descend", "h1_inner", "dual_norm_sq", "precondition"]


class RetractionError(ValueError):
    """Raised by a retraction when a trial point has no admissible image."""


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    grad: np.ndarray
    dual_norm: float
    iterations: int
    converged: bool
    stalled: bool
    history: list


def precondition(grid: RadialGrid, grad: np.ndarray) -> np.ndarray:
    ones = np.ones(grid.n)
    return solve_shifted_stiffness(grid, ones, grad.T).T


def h1_inner(grid: RadialGrid, a: np.ndarray, b: np.ndarray) -> float:
    total = 0.0
    for ai, bi in zip(np.atleast_2d(a), np.atleast_2d(b)):
        total += float(np.dot(ai, stiffness_apply(grid, bi)) + np.dot(grid.weights * ai, bi))
    return FOUR_PI * total


def _l2_inner(grid: RadialGrid, a: np.ndarray, b: np.ndarray) -> float:
    return FOUR_PI * float(np.sum(grid.weights * a * b))


def dual_norm_sq(grid: RadialGrid, grad: np.ndarray) -> float:
    """``||grad||_{H^-1}^2`` for an L^2 gradient field."""
    return _l2_inner(grid, grad, precondition(grid, grad))


def descend(
    grid: RadialGrid,
    x0: np.ndarray,
    evaluate: Callable[[np.ndarray], tuple[float, np.ndarray]],
    retract: Callable[[np.ndarray], np.ndarray] = lambda y: y,
    *,
    max_iter: int = 5000,
    gtol: float = 1e-9,
    ftol: float = 1e-15,
    step0: float = 1.0,
    stop: Callable[[np.ndarray, float], bool] | None = None,
) -> DescentResult:
    """Minimize ``evaluate`` starting at ``retract(x0)``.

    ``gtol`` bounds the H^-1 norm of the gradient relative to the H^1 norm
    of the iterate; ``ftol`` stops after 50 consecutive steps that improve
    the value by less than ``ftol`` relative.
    """
    x = retract(np.array(x0, dtype=float))
    f, g = evaluate(x)
    step = step0
    history = [f]
    x_prev = g_prev = None
    small = 0
    for it in range(1, max_iter + 1):
        d = precondition(grid, g)
        slope = _l2_inner(grid, g, d)
        scale = max(h1_inner(grid, x, x), 1e-300)
        if slope <= (gtol**2) * scale:
            return DescentResult(x, f, g, float(np.sqrt(max(slope, 0.0))), it - 1, True, False, history)
        if stop is not None and stop(x, f):
            return DescentResult(x, f, g, float(np.sqrt(slope)), it - 1, False, False, history)
        if x_prev is not None:
            dx, dg = x - x_prev, g - g_prev
            curv = _l2_inner(grid, dx, dg)
            if curv > 0:
                step = h1_inner(grid, dx, dx) / curv
            else:
                step = max(step, step0)
        accepted = False
        s = step
        for _ in range(60):
            try:
                trial = retract(x - s * d)
            except RetractionError:
                s *= 0.5
                continue
            f_trial, g_trial = evaluate(trial)
            if np.isfinite(f_trial) and f_trial <= f - 1e-4 * s * slope:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            return DescentResult(x, f, g, float(np.sqrt(slope)), it - 1, False, True, history)
        x_prev, g_prev = x, g
        improvement = f - f_trial
        x, f, g = trial, f_trial, g_trial
        history.append(f)
        small = small + 1 if improvement <= ftol * max(abs(f), 1e-300) else 0
        if small >= 50:
            d = precondition(grid, g)
            slope = _l2_inner(grid, g, d)
            return DescentResult(x, f, g, float(np.sqrt(max(slope, 0.0))), it, False, True, history)
    d = precondition(grid, g)
    slope = _l2_inner(grid, g, d)
    return DescentResult(x, f, g, float(np.sqrt(max(slope, 0.0))), max_iter, False, False, history)
