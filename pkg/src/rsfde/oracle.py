"""Dense reference implementations for small instances.

Everything here materializes matrices explicitly and is meant for tests and
spectral diagnostics only; orders above :data:`MAX_DENSE` are refused.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.linalg import hankel, toeplitz

from .fcd import fcd2_coefficients, fcd4_coefficients, _as_alpha
from .structured_ops import KroneckerSumOperator

__all__ = [
    "MAX_DENSE",
    "DenseSizeError",
    "dense_dst_matrix",
    "assemble_T_dense",
    "natural_tau_dense",
    "tridiagonal_Q",
    "assemble_tau_dense",
    "assemble_tau_preconditioner_dense",
    "assemble_circulant_dense",
    "kronecker_sum_dense",
    "generalized_spectrum",
    "lemma_constant",
    "toeplitz_lambda_min_bound",
    "check_symmetric",
    "fcd4_toeplitz_dense",
]

MAX_DENSE = 4096


class DenseSizeError(ValueError):
    pass


def _guard(N: int):
    if N > MAX_DENSE:
        raise DenseSizeError(f"dense order {N} exceeds the guard of {MAX_DENSE} unknowns")


def check_symmetric(A, tol: float = 1e-12, name: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    scale = max(1.0, float(np.max(np.abs(A))))
    asym = float(np.max(np.abs(A - A.T)))
    if asym > tol * scale:
        raise ValueError(f"{name} is not symmetric (max asymmetry {asym:.3e})")
    return A


def dense_dst_matrix(n: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(j, j) * np.pi / (n + 1))


def kronecker_sum_dense(mats, weights) -> np.ndarray:
    """``sum_i w_i I (x) A_i (x) I`` via explicit Kronecker products."""
    sizes = [m.shape[0] for m in mats]
    N = int(np.prod(sizes))
    _guard(N)
    out = np.zeros((N, N))
    for i, (A, w) in enumerate(zip(mats, weights)):
        left = int(np.prod(sizes[:i]))
        right = int(np.prod(sizes[i + 1 :]))
        out += w * np.kron(np.kron(np.eye(left), A), np.eye(right))
    return out


def _kronecker_sum_by_modes(mats, weights) -> np.ndarray:
    # Column J of the matrix is the operator applied to the J-th basis tensor.
    sizes = tuple(m.shape[0] for m in mats)
    N = int(np.prod(sizes))
    _guard(N)
    basis = np.eye(N).reshape(sizes + (N,))
    out = np.zeros_like(basis)
    for i, (A, w) in enumerate(zip(mats, weights)):
        out += w * np.moveaxis(np.tensordot(A, basis, axes=(1, i)), 0, i)
    return out.reshape(N, N)


def assemble_T_dense(op: KroneckerSumOperator, method: str = "kron") -> np.ndarray:
    _guard(op.size)
    mats = [b.dense() for b in op.blocks]
    if method == "kron":
        A = kronecker_sum_dense(mats, op.etas)
    elif method == "modes":
        A = _kronecker_sum_by_modes(mats, op.etas)
    else:
        raise ValueError(f"unknown method {method!r}")
    return check_symmetric(A, name="T")


def natural_tau_dense(c) -> np.ndarray:
    """Natural tau matrix ``T_n - H_n`` of symmetric Toeplitz column ``c``.

    ``H_n`` is the Hankel matrix with first column ``(c_2, ..., c_{n-1}, 0, 0)``
    and last column ``(0, 0, c_{n-1}, ..., c_2)``.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    _guard(n)
    first = np.concatenate([c[2:], np.zeros(min(2, n))])[:n]
    last = first[::-1]
    return toeplitz(c) - hankel(first, last)


def tridiagonal_Q(alpha: float, n: int) -> np.ndarray:
    """``I + (alpha/24) tridiag(-1, 2, -1)``; ``alpha`` is not range-checked here."""
    _guard(n)
    lap = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    return np.eye(n) + alpha / 24.0 * lap


def assemble_tau_dense(alpha, n: int, construction: str = "hankel") -> np.ndarray:
    """Dense ``P_alpha = Q_n tau(hat S_n)``.

    ``construction="hankel"`` forms ``tau(hat S_n)`` by subtracting the Hankel
    correction; ``"spectral"`` forms it as ``S^T diag(sigma) S`` with the DST-I
    matrix ``S`` and the truncated symbol ``sigma`` sampled at ``j pi/(n+1)``.
    """
    a = _as_alpha(alpha)
    _guard(n)
    g = fcd2_coefficients(a, max(n - 1, 0)).values
    if construction == "hankel":
        tau = natural_tau_dense(g)
    elif construction == "spectral":
        S = dense_dst_matrix(n)
        theta = np.arange(1, n + 1) * np.pi / (n + 1)
        sigma = g[0] + 2.0 * np.cos(np.outer(theta, np.arange(1, n))) @ g[1:]
        tau = S.T @ np.diag(sigma) @ S
    else:
        raise ValueError(f"unknown construction {construction!r}")
    return check_symmetric(tridiagonal_Q(a, n) @ tau, tol=1e-11, name="P_alpha")


def assemble_tau_preconditioner_dense(etas, alphas, shape, rbar) -> np.ndarray:
    """Dense ``rbar I + sum_i eta_i I (x) P_alpha_i (x) I``."""
    mats = [assemble_tau_dense(a, n) for a, n in zip(alphas, shape)]
    A = kronecker_sum_dense(mats, etas)
    return A + rbar * np.eye(A.shape[0])


def assemble_circulant_dense(column) -> np.ndarray:
    """Circulant matrix with the given first column."""
    c = np.asarray(column, dtype=float)
    _guard(c.size)
    return sla.circulant(c)


def generalized_spectrum(A, P) -> np.ndarray:
    """Sorted eigenvalues of ``P^{-1} A`` via ``P^{-1/2} A P^{-1/2}``."""
    A = check_symmetric(A, tol=1e-10, name="A")
    P = check_symmetric(P, tol=1e-10, name="P")
    _guard(A.shape[0])
    w, V = np.linalg.eigh(P)
    if not np.all(w > 0):
        raise ValueError(f"P is not positive definite (min eigenvalue {w.min():.3e})")
    Ph = (V / np.sqrt(w)) @ V.T
    B = Ph @ A @ Ph
    return np.sort(np.linalg.eigvalsh(0.5 * (B + B.T)))


def lemma_constant(lower, upper, alphas) -> float:
    """``(1 - 1/pi) (2/pi)^{alpha_max} sum_i 1 / (2 (b_i - a_i)^{alpha_i})``.

    ``C * K_min * dt * ||u||^2`` bounds ``<T u, u>`` from below.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    alphas = np.asarray([_as_alpha(a) for a in alphas])
    L = upper - lower
    if np.any(L <= 0):
        raise ValueError("domain must have positive extent in every direction")
    return float((1 - 1 / np.pi) * (2 / np.pi) ** alphas.max() * np.sum(1.0 / (2.0 * L**alphas)))


def toeplitz_lambda_min_bound(alpha, n: int) -> float:
    """Closed-form lower bound ``[2/(pi(n+1))]^alpha (1 - 1/pi)`` on ``lambda_min(S_n)``."""
    a = _as_alpha(alpha)
    return (2.0 / (np.pi * (n + 1))) ** a * (1 - 1 / np.pi)


def fcd4_toeplitz_dense(alpha, n: int) -> np.ndarray:
    return toeplitz(fcd4_coefficients(alpha, n - 1).values)

