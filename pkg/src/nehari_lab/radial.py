"""Radial grids, grid functions, quadrature and norms.

Every integral over R^3 of a radial integrand is realized as
``4*pi * sum(w_i * f(r_i))`` where the weights ``w_i`` already carry the
``r**2`` Jacobian.  The weights come from product integration of a local
quadratic interpolant, so monomials up to ``r**2`` (times the Jacobian) are
integrated exactly and all weights stay positive.

Gradients are taken as midpoint differences ``(u[i+1]-u[i])/(r[i+1]-r[i])``
on each cell, i.e. the Dirichlet energy of the piecewise linear interpolant.
The same cell couplings define the conservative three-point Laplacian used by
the residual, so the discrete energy and its gradient are exactly consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import solve_banded

__all__ = [
    "RadialGrid",
    "RadialFn",
    "VecPair",
    "make_grid",
    "default_grid",
    "integrate",
    "dirichlet_energy",
    "h1_norm_sq",
    "lp_norm_pow",
    "l2_norm_sq",
    "strauss_ratio",
    "laplacian",
    "stiffness_apply",
    "solve_shifted_stiffness",
]

FOUR_PI = 4.0 * np.pi
MIN_NODES = 64

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(3)


def _lagrange3(x0, x1, x2, s):
    return (
        (s - x1) * (s - x2) / ((x0 - x1) * (x0 - x2)),
        (s - x0) * (s - x2) / ((x1 - x0) * (x1 - x2)),
        (s - x0) * (s - x1) / ((x2 - x0) * (x2 - x1)),
    )


def _product_weights(r: np.ndarray) -> np.ndarray:
    """Weights for int_0^{r_n} f(r) r^2 dr from local quadratic interpolation.

    Each cell [r_j, r_{j+1}] averages the two three-node stencils that contain
    it (one at the ends); the first cell [0, r_1] extrapolates from r_1..r_3.
    The integrand (quadratic times r^2) is integrated exactly by 3-point Gauss.
    """
    n = r.size
    w = np.zeros(n)

    def add(a, b, idx, factor):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        x = [r[i] for i in idx]
        for gx, gw in zip(_GAUSS_X, _GAUSS_W):
            s = mid + half * gx
            basis = _lagrange3(*x, s)
            for k in range(3):
                np.add.at(w, idx[k], factor * half * gw * basis[k] * s * s)

    first = np.array([0])
    add(np.zeros(1), r[:1], [first, first + 1, first + 2], 1.0)
    j = np.arange(n - 1)
    left = j >= 1
    right = j + 2 <= n - 1
    factor = 1.0 / (left.astype(float) + right.astype(float))
    jl = j[left]
    add(r[jl], r[jl + 1], [jl - 1, jl, jl + 1], factor[left])
    jr = j[right]
    add(r[jr], r[jr + 1], [jr, jr + 1, jr + 2], factor[right])
    return w


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Radial nodes ``0 < r_1 < ... < r_n = r_max`` with quadrature weights."""

    n: int
    r_max: float
    scheme: str
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @cached_property
    def couplings(self) -> np.ndarray:
        """Cell stiffness ``int_cell r^2 dr / h_cell^2`` for cells between nodes."""
        r = self.nodes
        h = np.diff(r)
        shell = (r[1:] ** 3 - r[:-1] ** 3) / 3.0
        return _frozen(shell / h**2)

    @property
    def key(self) -> tuple:
        return (self.n, float(self.r_max), self.scheme)

    def fn(self, values) -> "RadialFn":
        return RadialFn(self, values)

    def zeros(self) -> "RadialFn":
        return RadialFn(self, np.zeros(self.n))

    def __eq__(self, other) -> bool:
        return isinstance(other, RadialGrid) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)


def make_grid(n: int = 4096, r_max: float = 30.0, scheme: str = "log", scale: float = 1.0) -> RadialGrid:
    """Build a radial grid.

    ``uniform``: ``r_i = i*r_max/n``.  ``log``: ``r_i = scale*(exp(i*d) - 1)``,
    which is uniform with spacing ``scale*d`` near the origin and geometric
    further out.
    """
    if int(n) != n or n < MIN_NODES:
        raise ValueError(f"grid needs n >= {MIN_NODES} nodes, got {n}")
    if not r_max > 0:
        raise ValueError(f"r_max must be positive, got {r_max}")
    n = int(n)
    i = np.arange(1, n + 1, dtype=float)
    if scheme == "uniform":
        r = r_max * i / n
    elif scheme == "log":
        if not scale > 0:
            raise ValueError("log grid scale must be positive")
        d = np.log1p(r_max / scale) / n
        r = scale * np.expm1(d * i)
    else:
        raise ValueError(f"unknown grid scheme {scheme!r}")
    r[-1] = r_max
    return RadialGrid(n, float(r_max), scheme, _frozen(r), _frozen(_product_weights(r)))


def default_grid(n: int = 4096) -> RadialGrid:
    return make_grid(n, 30.0, "log")


@dataclass(frozen=True, eq=False)
class RadialFn:
    """Samples ``u(r_i)`` of a radial profile on a grid."""

    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("radial function has non-finite samples")
        object.__setattr__(self, "values", _frozen(vals))

    def __mul__(self, c: float) -> "RadialFn":
        return RadialFn(self.grid, self.values * c)

    __rmul__ = __mul__

    def __add__(self, other: "RadialFn") -> "RadialFn":
        return RadialFn(self.grid, self.values + other.values)

    def __abs__(self) -> "RadialFn":
        return RadialFn(self.grid, np.abs(self.values))


@dataclass(frozen=True)
class VecPair:
    u: RadialFn
    v: RadialFn

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValueError("pair components live on different grids")

    @classmethod
    def from_arrays(cls, grid: RadialGrid, u, v) -> "VecPair":
        return cls(RadialFn(grid, u), RadialFn(grid, v))

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    def scaled(self, t: float) -> "VecPair":
        return VecPair(self.u * t, self.v * t)

    def swapped(self) -> "VecPair":
        return VecPair(self.v, self.u)

    def __abs__(self) -> "VecPair":
        return VecPair(abs(self.u), abs(self.v))

    @property
    def is_trivial(self) -> bool:
        return max(l2_norm_sq(self.u), l2_norm_sq(self.v)) == 0.0


def integrate(grid: RadialGrid, samples) -> float:
    """``int_{R^3} f dx`` for radial samples ``f(r_i)``."""
    s = np.asarray(samples, dtype=float)
    if s.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got shape {s.shape}")
    return FOUR_PI * float(np.dot(grid.weights, s))


def dirichlet_energy(u: RadialFn) -> float:
    """``int |grad u|^2`` with midpoint differences; u is constant on [0, r_1]."""
    g = u.grid
    return FOUR_PI * float(np.dot(g.couplings, np.diff(u.values) ** 2))


def l2_norm_sq(u: RadialFn) -> float:
    return integrate(u.grid, u.values**2)


def h1_norm_sq(u: RadialFn) -> float:
    return dirichlet_energy(u) + l2_norm_sq(u)


def lp_norm_pow(u: RadialFn, q: float) -> float:
    if q < 1:
        raise ValueError(f"exponent q must be >= 1, got {q}")
    return integrate(u.grid, np.abs(u.values) ** q)


def strauss_ratio(u: RadialFn) -> float:
    """``max_i r_i |u(r_i)| / ||u||_{H^1}`` over interior nodes."""
    norm = h1_norm_sq(u)
    if norm == 0.0:
        raise ValueError("Strauss ratio is undefined for the zero function")
    r = u.grid.nodes
    return float(np.max(r[:-1] * np.abs(u.values[:-1]))) / np.sqrt(norm)


def stiffness_apply(grid: RadialGrid, values: np.ndarray) -> np.ndarray:
    """Gradient of ``sum(c * diff(u)**2) / 2``, i.e. the stiffness matrix times u."""
    flux = grid.couplings * np.diff(values)
    out = np.zeros_like(values, dtype=float)
    out[:-1] -= flux
    out[1:] += flux
    return out


def laplacian(u: RadialFn) -> np.ndarray:
    """Conservative ``(1/r^2)(r^2 u')'`` with u'(0)=0; the last node is the boundary."""
    lap = -stiffness_apply(u.grid, u.values) / u.grid.weights
    lap[-1] = 0.0
    return lap


def solve_shifted_stiffness(grid: RadialGrid, diag: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(K + diag(weights*diag)) x = weights*rhs`` with x = 0 at r_max.

    ``K`` is the stiffness matrix.  With ``diag = 1`` this applies the inverse
    of ``-Delta + 1``, the H^1 Riesz map used as a preconditioner.  ``rhs`` may
    be a 1-D array or stacked columns.
    """
    c = grid.couplings
    n = grid.n
    ab = np.zeros((3, n))
    ab[1] = grid.weights * diag
    ab[1, :-1] += c
    ab[1, 1:] += c
    ab[0, 1:] = -c
    ab[2, :-1] = -c
    ab[1, -1] = 1.0
    ab[0, -1] = 0.0
    ab[2, -2] = 0.0
    b = (grid.weights * rhs.T).T.copy() if rhs.ndim > 1 else grid.weights * rhs
    b[-1] = 0.0
    return solve_banded((1, 1), ab, b)
