"""Matrix-free (preconditioned) conjugate gradients on grid fields.

Operators are plain callables mapping an array to an array of the same shape.
Convergence is tested on the unpreconditioned relative residual
``||b - A x||_2 / ||b||_2`` with a zero initial guess.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = ["SolveStats", "BreakdownError", "cg", "pcg"]

logger = logging.getLogger(__name__)

Operator = Callable[[np.ndarray], np.ndarray]

REFRESH_EVERY = 50


class BreakdownError(ArithmeticError):
    """Raised when a curvature term is not positive (operator not SPD)."""


@dataclass
class SolveStats:
    iterations: int = 0
    history: list = field(default_factory=list)
    converged: bool = False
    final_residual: float = 0.0

    def __post_init__(self):
        self.history = list(self.history)


def _dot(a, b) -> float:
    return float(np.vdot(a, b))


def pcg(
    applyA: Operator,
    applyPinv: Optional[Operator],
    b,
    tol: float = 1e-9,
    maxit: Optional[int] = None,
    callback: Optional[Callable[[np.ndarray], None]] = None,
):
    """Solve ``A x = b`` by PCG starting from ``x = 0``.

    ``applyPinv`` applies the inverse of an SPD preconditioner; ``None`` gives
    plain CG.  ``maxit`` defaults to the number of unknowns.  ``callback`` is
    called with the iterate after every iteration.

    Returns ``(x, SolveStats)``; ``stats.converged`` is false when ``maxit``
    iterations did not reach ``tol``.
    """
    b = np.asarray(b, dtype=float)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side contains non-finite values")
    maxit = b.size if maxit is None else int(maxit)

    x = np.zeros_like(b)
    bnorm = float(np.linalg.norm(b))
    stats = SolveStats(history=[1.0 if bnorm > 0 else 0.0])
    if bnorm == 0.0:
        stats.converged = True
        return x, stats

    precondition = (lambda v: v) if applyPinv is None else applyPinv
    r = b.copy()
    z = precondition(r)
    rz = _dot(r, z)
    if not rz > 0:
        raise BreakdownError(f"preconditioned residual product is {rz:.3e} at iteration 0")
    p = z.copy()
    relres = 1.0

    k = 0
    while k < maxit:
        Ap = applyA(p)
        pAp = _dot(p, Ap)
        if not pAp > 0:
            raise BreakdownError(f"p^T A p = {pAp:.3e} at iteration {k}")
        step = rz / pAp
        x += step * p
        k += 1
        if k % REFRESH_EVERY == 0:
            r = b - applyA(x)
        else:
            r -= step * Ap
        relres = float(np.linalg.norm(r)) / bnorm
        if relres <= tol:
            # confirm against the true residual before stopping
            r = b - applyA(x)
            relres = float(np.linalg.norm(r)) / bnorm
        stats.history.append(relres)
        if callback is not None:
            callback(x)
        if relres <= tol:
            stats.converged = True
            break
        z = precondition(r)
        rz_new = _dot(r, z)
        if not rz_new > 0:
            raise BreakdownError(f"preconditioned residual product is {rz_new:.3e} at iteration {k}")
        p = z + (rz_new / rz) * p
        rz = rz_new

    stats.iterations = k
    stats.final_residual = relres
    if not stats.converged:
        logger.debug("pcg stopped after %d iterations at relative residual %.3e", k, relres)
    return x, stats


def cg(applyA: Operator, b, tol: float = 1e-9, maxit: Optional[int] = None, callback=None):
    """Unpreconditioned conjugate gradients; see :func:`pcg`."""
    return pcg(applyA, None, b, tol=tol, maxit=maxit, callback=callback)
