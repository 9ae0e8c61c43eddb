"""Problem definitions, grids and manufactured solutions.

The model problem is

    r(x, t) u_t = sum_i K_i D_i^{alpha_i} u + f(x, t)   in a box, t in (0, T]

with homogeneous Dirichlet data, where ``D_i^{alpha_i}`` is the Riesz
derivative along ``x_i``.  Grid fields have shape ``(n_1, ..., n_d)`` and hold
interior nodes only.

Callables in :class:`ProblemSpec` are vectorized: spatial arguments are passed
as a tuple of broadcastable coordinate arrays ``(x_1, ..., x_d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import gamma

from .fcd import _as_alpha

__all__ = [
    "Domain",
    "ProblemSpec",
    "GridSpec",
    "SeparablePolynomialSolution",
    "sample_coefficient",
    "sample_source",
    "sample_exact",
    "riesz_derivative_of_polynomial",
    "manufactured_source",
    "manufactured_problem",
    "discrete_l2_norm",
    "example1",
    "example2",
    "builtin_problem",
    "BUMP",
]

Coords = tuple

# x^4 (1 - x)^4 in ascending powers
BUMP = (0.0, 0.0, 0.0, 0.0, 1.0, -4.0, 6.0, -4.0, 1.0)


@dataclass(frozen=True)
class Domain:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(a) for a in np.atleast_1d(self.lower))
        hi = tuple(float(b) for b in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower and upper bounds must be non-empty and of equal length")
        if any(not (a < b) for a, b in zip(lo, hi)):
            raise ValueError(f"need lower < upper in every direction, got {lo} / {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def unit(cls, d: int) -> "Domain":
        return cls((0.0,) * d, (1.0,) * d)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def lengths(self) -> np.ndarray:
        return np.subtract(self.upper, self.lower)


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    domain: Domain
    alphas: tuple
    diffusion: tuple
    final_time: float
    coefficient: Callable
    source: Callable
    initial: Callable
    exact: Optional[Callable] = None
    name: str = "custom"

    def __post_init__(self):
        d = self.domain.dimension
        alphas = tuple(_as_alpha(a) for a in self.alphas)
        K = tuple(float(k) for k in self.diffusion)
        if len(alphas) != d or len(K) != d:
            raise ValueError(f"need {d} orders and {d} diffusion constants, got {len(alphas)} and {len(K)}")
        if any(not (k > 0) for k in K):
            raise ValueError(f"diffusion constants must be positive, got {K}")
        if not (self.final_time > 0):
            raise ValueError(f"final time must be positive, got {self.final_time}")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "diffusion", K)
        object.__setattr__(self, "final_time", float(self.final_time))

    @property
    def dimension(self) -> int:
        return self.domain.dimension


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with ``n_i`` interior points per direction and ``M`` steps."""

    n: tuple
    M: int
    domain: Domain
    final_time: float

    def __post_init__(self):
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        if len(n) != self.domain.dimension:
            raise ValueError(f"need {self.domain.dimension} point counts, got {n}")
        if any(v < 1 for v in n):
            raise ValueError(f"point counts must be positive, got {n}")
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"number of time steps must be a positive integer, got {self.M!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "M", int(self.M))

    @classmethod
    def create(cls, spec: ProblemSpec, n, M: int) -> "GridSpec":
        n = np.atleast_1d(n)
        if n.size == 1:
            n = np.repeat(n, spec.dimension)
        return cls(tuple(n), M, spec.domain, spec.final_time)

    @property
    def shape(self) -> tuple:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def h(self) -> np.ndarray:
        return self.domain.lengths / (np.asarray(self.n) + 1)

    @property
    def dt(self) -> float:
        return self.final_time / self.M

    def time(self, m: float) -> float:
        return m * self.dt

    def etas(self, spec: ProblemSpec) -> np.ndarray:
        """``eta_i = K_i dt / (2 h_i^{alpha_i})``."""
        return np.asarray(spec.diffusion) * self.dt / (2.0 * self.h ** np.asarray(spec.alphas))

    def nodes(self, i: int) -> np.ndarray:
        return self.domain.lower[i] + self.h[i] * np.arange(1, self.n[i] + 1)

    def mesh(self) -> Coords:
        return tuple(np.meshgrid(*[self.nodes(i) for i in range(len(self.n))], indexing="ij", sparse=True))


def _broadcast_field(values, grid: GridSpec) -> np.ndarray:
    return np.ascontiguousarray(np.broadcast_to(np.asarray(values, dtype=float), grid.shape))


def sample_coefficient(spec: ProblemSpec, grid: GridSpec, m: int) -> np.ndarray:
    """Diagonal of ``D^{m+1/2}``: ``r`` at the interior nodes and ``t = (m + 1/2) dt``."""
    if not (0 <= m <= grid.M - 1):
        raise ValueError(f"step index {m} outside 0..{grid.M - 1}")
    r = _broadcast_field(spec.coefficient(grid.mesh(), grid.time(m + 0.5)), grid)
    if not np.all(r > 0):
        raise ValueError(f"coefficient r is not positive at step {m} (min {r.min():.3e})")
    return r


def sample_source(spec: ProblemSpec, grid: GridSpec, t: float) -> np.ndarray:
    return _broadcast_field(spec.source(grid.mesh(), t), grid)


def sample_exact(spec: ProblemSpec, grid: GridSpec, t: float) -> np.ndarray:
    if spec.exact is None:
        raise ValueError(f"problem {spec.name!r} has no exact solution")
    return _broadcast_field(spec.exact(grid.mesh(), t), grid)


def discrete_l2_norm(values, grid: GridSpec) -> float:
    """``sqrt(prod(h) * sum u_J^2)``."""
    u = np.asarray(values, dtype=float)
    if u.shape != grid.shape:
        raise ValueError(f"field shape {u.shape} does not match grid {grid.shape}")
    return float(np.sqrt(np.prod(grid.h)) * np.linalg.norm(u.ravel()))


def _rl_monomial_sum(coeffs: np.ndarray, alpha: float, y) -> np.ndarray:
    # sum_k c_k G(k+1)/G(k+1-alpha) y^(k-alpha)
    out = np.zeros_like(y, dtype=float)
    for k, c in enumerate(coeffs):
        if c != 0.0:
            out = out + c * (math.factorial(k) / gamma(k + 1 - alpha)) * y ** (k - alpha)
    return out


def _vanishes_twice(coeffs: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(coeffs)))) if coeffs.size else 1.0
    head = np.concatenate([coeffs, [0.0, 0.0]])[:2]
    return bool(np.all(np.abs(head) <= 1e-12 * scale))


def riesz_derivative_of_polynomial(poly, alpha, x):
    """Riesz derivative on (0, 1) of ``sum_k poly[k] x^k`` (extended by zero outside).

    Evaluated as ``-(D_left + D_right) / (2 cos(alpha pi / 2))`` with the
    Riemann-Liouville derivatives of monomials in ``x`` and in ``1 - x``.  The
    polynomial must vanish with its first derivative at both endpoints.
    """
    a = _as_alpha(alpha)
    c = np.trim_zeros(np.asarray(poly, dtype=float), "b")
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x >= 1)):
        raise ValueError("evaluation points must lie strictly inside (0, 1)")
    cosine = math.cos(a * math.pi / 2)
    if cosine == 0.0:
        raise ValueError(f"Riesz prefactor undefined for alpha={a}")
    if c.size == 0:
        return np.zeros_like(x)
    mirrored = Polynomial(c)(Polynomial([1.0, -1.0])).coef
    if not (_vanishes_twice(c) and _vanishes_twice(mirrored)):
        raise ValueError("polynomial must vanish to second order at both endpoints")
    left = _rl_monomial_sum(c, a, x)
    right = _rl_monomial_sum(mirrored, a, 1.0 - x)
    return -(left + right) / (2.0 * cosine)


@dataclass(frozen=True, eq=False)
class SeparablePolynomialSolution:
    """``u(x, t) = amplitude * exp(-t) * prod_i p_i((x_i - a_i) / L_i)``."""

    amplitude: float
    factors: tuple
    domain: Domain

    def __post_init__(self):
        factors = tuple(tuple(float(v) for v in f) for f in self.factors)
        if len(factors) != self.domain.dimension:
            raise ValueError(f"need {self.domain.dimension} polynomial factors, got {len(factors)}")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "amplitude", float(self.amplitude))

    def _local(self, X: Coords):
        return [(np.asarray(x) - a) / L for x, a, L in zip(X, self.domain.lower, self.domain.lengths)]

    def __call__(self, X: Coords, t):
        vals = [Polynomial(p)(y) for p, y in zip(self.factors, self._local(X))]
        return self.amplitude * np.exp(-t) * np.prod(np.broadcast_arrays(*vals), axis=0)

    def time_derivative(self, X: Coords, t):
        return -self(X, t)

    def riesz(self, X: Coords, t, i: int, alpha):
        """Riesz derivative of order ``alpha`` along ``x_i``."""
        Y = self._local(X)
        L = self.domain.lengths[i]
        vals = [Polynomial(p)(y) for p, y in zip(self.factors, Y)]
        vals[i] = riesz_derivative_of_polynomial(self.factors[i], alpha, Y[i]) / L ** _as_alpha(alpha)
        return self.amplitude * np.exp(-t) * np.prod(np.broadcast_arrays(*vals), axis=0)


def manufactured_source(spec: ProblemSpec, X: Coords, t):
    """``f = r u_t - sum_i K_i D_i u`` for the separable exact solution of ``spec``."""
    u = spec.exact
    if not isinstance(u, SeparablePolynomialSolution):
        raise ValueError("manufactured sources need a SeparablePolynomialSolution")
    X = tuple(np.asarray(x, dtype=float) for x in X)
    out = spec.coefficient(X, t) * u.time_derivative(X, t)
    for i, (a, K) in enumerate(zip(spec.alphas, spec.diffusion)):
        out = out - K * u.riesz(X, t, i, a)
    return out


def manufactured_problem(domain: Domain, alphas, diffusion, final_time, coefficient, exact, name="custom") -> ProblemSpec:
    """Problem whose source and initial data are generated from ``exact``."""
    holder = {}

    def source(X, t):
        return manufactured_source(holder["spec"], X, t)

    def initial(X):
        return exact(X, 0.0)

    spec = ProblemSpec(domain, tuple(alphas), tuple(diffusion), final_time, coefficient, source, initial, exact, name)
    holder["spec"] = spec
    return spec


def _radial_coefficient(X, t):
    return (sum(np.asarray(x) ** 2 for x in X) + np.exp(-t)) / 100.0


def example1(alphas=(1.5, 1.5)) -> ProblemSpec:
    """2D: ``u = 1e4 e^{-t} x1^4(1-x1)^4 x2^4(1-x2)^4``, ``r = (x1^2 + x2^2 + e^{-t})/100``, ``K = (100, 100)``."""
    dom = Domain.unit(2)
    exact = SeparablePolynomialSolution(1e4, (BUMP, BUMP), dom)
    return manufactured_problem(dom, alphas, (100.0, 100.0), 1.0, _radial_coefficient, exact, "example1")


def example2(alphas=(1.1, 1.5, 1.9)) -> ProblemSpec:
    """3D analogue with amplitude ``1e8`` and ``K = (100, 85, 103)``."""
    dom = Domain.unit(3)
    exact = SeparablePolynomialSolution(1e8, (BUMP, BUMP, BUMP), dom)
    return manufactured_problem(dom, alphas, (100.0, 85.0, 103.0), 1.0, _radial_coefficient, exact, "example2")


_BUILTINS = {"example1": example1, "example2": example2}


def builtin_problem(name: str, alphas=None) -> ProblemSpec:
    try:
        factory = _BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin problem {name!r}; expected one of {sorted(_BUILTINS)}") from None
    return factory() if alphas is None else factory(tuple(alphas))
