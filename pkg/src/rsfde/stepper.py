"""Crank-Nicolson time marching with the fourth-order centered difference.

Each step solves

    (D^{m+1/2} + T) u^{m+1} = (D^{m+1/2} - T) u^m + dt f^{m+1/2}

with ``D^{m+1/2} = diag(r(x, t_{m+1/2}))`` and the time-independent
Kronecker-sum Toeplitz operator ``T``.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fcd import fcd4_coefficients
from .krylov import SolveStats, pcg
from .precond import AveragingRule, average_coefficient, build_preconditioner
from .problem import (
    GridSpec,
    ProblemSpec,
    discrete_l2_norm,
    sample_coefficient,
    sample_exact,
    sample_source,
)
from .structured_ops import KroneckerSumOperator, SymmetricToeplitz1D

__all__ = [
    "ConvergenceFailure",
    "MarchReport",
    "StudyRow",
    "Refinement",
    "build_operator",
    "march",
    "convergence_study",
    "observed_orders",
    "stability_witness",
    "refine",
]

logger = logging.getLogger(__name__)

PRECONDITIONERS = ("tau", "strang", "chan", "none")


class ConvergenceFailure(RuntimeError):
    def __init__(self, step: int, stats: SolveStats):
        super().__init__(
            f"linear solve did not converge at step {step} "
            f"({stats.iterations} iterations, relative residual {stats.final_residual:.3e})"
        )
        self.step = step
        self.stats = stats


@dataclass
class MarchReport:
    steps: list = field(default_factory=list)
    wall_time: float = 0.0
    error: Optional[float] = None
    preconditioner: str = "tau"

    @property
    def iterations(self) -> np.ndarray:
        return np.array([s.iterations for s in self.steps], dtype=int)

    @property
    def mean_iterations(self) -> float:
        return float(self.iterations.mean()) if self.steps else 0.0

    @property
    def max_iterations(self) -> int:
        return int(self.iterations.max()) if self.steps else 0

    @property
    def converged(self) -> bool:
        return all(s.converged for s in self.steps)


def build_operator(spec: ProblemSpec, grid: GridSpec) -> KroneckerSumOperator:
    blocks = [
        SymmetricToeplitz1D(fcd4_coefficients(a, n - 1).values)
        for a, n in zip(spec.alphas, grid.n)
    ]
    return KroneckerSumOperator(blocks, grid.etas(spec))


def march(
    spec: ProblemSpec,
    grid: GridSpec,
    preconditioner: Optional[str] = "tau",
    tol: float = 1e-9,
    maxit: Optional[int] = None,
    rbar_rule="arithmetic",
    strict: bool = True,
):
    """March from ``t = 0`` to ``t = T``; returns ``(u(T), MarchReport)``.

    ``preconditioner`` is one of ``"tau"``, ``"strang"``, ``"chan"`` or
    ``"none"``/``None`` (plain CG).  With ``strict`` a failed step raises
    :class:`ConvergenceFailure`; otherwise the march continues and the failure
    is visible in the report.
    """
    kind = "none" if preconditioner is None else str(preconditioner)
    if kind not in PRECONDITIONERS:
        raise ValueError(f"unknown preconditioner {kind!r}; expected one of {PRECONDITIONERS}")
    rule = AveragingRule(rbar_rule)
    start = time.perf_counter()

    T = build_operator(spec, grid)
    u = np.ascontiguousarray(np.broadcast_to(spec.initial(grid.mesh()), grid.shape), dtype=float)
    report = MarchReport(preconditioner=kind)
    P = None
    for m in range(grid.M):
        r = sample_coefficient(spec, grid, m)
        f = sample_source(spec, grid, grid.time(m + 0.5))
        rhs = r * u - T(u) + grid.dt * f
        if kind != "none":
            rbar = average_coefficient(r, rule)[0]
            # only rbar changes from step to step
            P = build_preconditioner(kind, T.etas, spec.alphas, grid.shape, rbar) if P is None else P.with_rbar(rbar)

        def applyA(v, r=r):
            return r * v + T(v)

        u, stats = pcg(applyA, P, rhs, tol=tol, maxit=maxit)
        report.steps.append(stats)
        if not stats.converged:
            if strict:
                raise ConvergenceFailure(m, stats)
            logger.warning("step %d: solver stopped at relative residual %.3e", m, stats.final_residual)

    if spec.exact is not None:
        report.error = discrete_l2_norm(u - sample_exact(spec, grid, spec.final_time), grid)
    report.wall_time = time.perf_counter() - start
    return u, report


class Refinement(str, enum.Enum):
    TEMPORAL = "temporal"
    SPATIAL = "spatial"


@dataclass
class StudyRow:
    h: float
    dt: float
    error: float
    order: Optional[float]
    n: tuple
    M: int
    mean_iterations: float


def refine(grid: GridSpec, mode) -> GridSpec:
    """Halve ``dt`` (temporal) or every ``h_i`` (spatial)."""
    mode = Refinement(mode)
    if mode is Refinement.TEMPORAL:
        return GridSpec(grid.n, 2 * grid.M, grid.domain, grid.final_time)
    return GridSpec(tuple(2 * (n + 1) - 1 for n in grid.n), grid.M, grid.domain, grid.final_time)


def observed_orders(errors) -> list:
    """``log2(E_k / E_{k+1})`` between consecutive levels (``None`` for the first)."""
    errors = list(errors)
    return [None] + [math.log2(a / b) for a, b in zip(errors[:-1], errors[1:])]


def convergence_study(
    spec: ProblemSpec,
    base: GridSpec,
    mode,
    levels: int,
    preconditioner: Optional[str] = "tau",
    tol: float = 1e-9,
    rbar_rule="arithmetic",
) -> list:
    """Errors at ``t = T`` over ``levels`` successive refinements of ``base``."""
    if spec.exact is None:
        raise ValueError("a convergence study needs an exact solution")
    if levels < 1:
        raise ValueError(f"levels must be positive, got {levels}")
    grids = [base]
    for _ in range(levels - 1):
        grids.append(refine(grids[-1], mode))
    results = []
    for g in grids:
        _, rep = march(spec, g, preconditioner, tol=tol, rbar_rule=rbar_rule)
        results.append((g, rep))
        logger.info("n=%s M=%d error=%.6e", g.n, g.M, rep.error)
    orders = observed_orders([rep.error for _, rep in results])
    return [
        StudyRow(float(np.max(g.h)), g.dt, rep.error, o, g.n, g.M, rep.mean_iterations)
        for (g, rep), o in zip(results, orders)
    ]


def stability_witness(spec: ProblemSpec, grid: GridSpec, m: int, method: str = "symmetric") -> float:
    """Spectral radius of ``(I + D^{-1} T)^{-1} (I - D^{-1} T)`` at step ``m``.

    ``"symmetric"`` uses the eigenvalues ``mu`` of ``D^{-1/2} T D^{-1/2}``
    (``rho = max |1 - mu| / (1 + mu)``); ``"direct"`` forms the iteration
    matrix and calls a general eigensolver.
    """
    from .oracle import assemble_T_dense, _guard

    _guard(grid.size)
    Td = assemble_T_dense(build_operator(spec, grid))
    r = sample_coefficient(spec, grid, m).ravel()
    if method == "symmetric":
        s = 1.0 / np.sqrt(r)
        mu = np.linalg.eigvalsh(s[:, None] * Td * s[None, :])
        return float(np.max(np.abs((1.0 - mu) / (1.0 + mu))))
    if method == "direct":
        DT = Td / r[:, None]
        eye = np.eye(grid.size)
        G = np.linalg.solve(eye + DT, eye - DT)
        return float(np.max(np.abs(np.linalg.eigvals(G))))
    raise ValueError(f"unknown method {method!r}")
