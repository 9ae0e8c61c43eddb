"""Sine-transform (tau) and circulant preconditioners for ``D + T`` systems.

Each preconditioner has the form ``rbar * I + sum_i eta_i I (x) P_i (x) I``
where ``P_i`` lies in a fast-diagonalizable algebra, so its inverse is applied
with one forward transform, an entrywise division and one inverse transform.
"""

from __future__ import annotations

import enum
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from .fcd import fcd2_coefficients, fcd4_coefficients, _as_alpha
from .structured_ops import multi_dst

__all__ = [
    "AveragingRule",
    "CirculantVariant",
    "TauPreconditioner",
    "CirculantPreconditioner",
    "average_coefficient",
    "tau_symbol_samples",
    "tau_eigenvalues_1d",
    "build_tau",
    "apply_tau_inverse",
    "strang_column",
    "chan_column",
    "circulant_eigenvalues_1d",
    "build_circulant",
    "apply_circulant_inverse",
    "build_preconditioner",
]


class AveragingRule(str, enum.Enum):
    ARITHMETIC = "arithmetic"
    GEOMETRIC = "geometric"


class CirculantVariant(str, enum.Enum):
    STRANG = "strang"
    CHAN = "chan"


def average_coefficient(diag, rule="arithmetic") -> tuple[float, float, float]:
    """Return ``(rbar, rmin, rmax)`` for a positive sampled coefficient field."""
    d = np.asarray(diag, dtype=float)
    if d.size == 0:
        raise ValueError("empty coefficient field")
    rmin, rmax = float(d.min()), float(d.max())
    if not rmin > 0:
        raise ValueError(f"coefficient field must be positive, min is {rmin}")
    rule = AveragingRule(rule)
    if rule is AveragingRule.ARITHMETIC:
        rbar = 0.5 * (rmax + rmin)
    else:
        rbar = float(np.sqrt(rmax * rmin))
    return rbar, rmin, rmax


def _grid_angles(n: int) -> np.ndarray:
    return np.arange(1, n + 1) * np.pi / (n + 1)


def tau_symbol_samples(coefficients, n: int, method: str = "fast") -> np.ndarray:
    """Eigenvalues of the natural tau matrix of a symmetric Toeplitz matrix.

    ``sigma_j = c_0 + 2 sum_{k=1}^{n-1} c_k cos(k j pi/(n+1))``, ``j = 1..n``.
    ``"fast"`` uses a DCT-I of length ``n+2``; ``"direct"`` the O(n^2) sum.
    """
    c = np.asarray(coefficients, dtype=float)[:n]
    if c.size != n:
        raise ValueError(f"need {n} coefficients, got {c.size}")
    if method == "direct":
        k = np.arange(1, n)
        theta = _grid_angles(n)
        return c[0] + 2.0 * np.cos(np.outer(theta, k)) @ c[1:]
    if method != "fast":
        raise ValueError(f"unknown method {method!r}")
    # DCT-I of [c_0..c_{n-1}, 0, 0]: y_j = c_0 + 2 sum_{k=1}^{n-1} c_k cos(pi j k / (n+1))
    x = np.concatenate([c, [0.0, 0.0]])
    return sfft.dct(x, type=1)[1 : n + 1]


def tau_eigenvalues_1d(alpha, n: int, method: str = "fast") -> np.ndarray:
    """Eigenvalues of ``Q_n tau(hat S_n)`` in DST-I order ``j = 1..n``."""
    a = _as_alpha(alpha)
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    theta = _grid_angles(n)
    q = 1.0 + a / 6.0 * np.sin(theta / 2.0) ** 2
    ghat = fcd2_coefficients(a, max(n - 1, 0)).values
    return q * tau_symbol_samples(ghat, n, method=method)


def _outer_sum(vectors: Sequence[np.ndarray], weights: Sequence[float]) -> np.ndarray:
    d = len(vectors)
    total = np.zeros(tuple(v.size for v in vectors), dtype=np.result_type(*vectors))
    for i, (v, w) in enumerate(zip(vectors, weights)):
        shape = [1] * d
        shape[i] = -1
        total = total + w * v.reshape(shape)
    return total


def _check_common(etas, shape, rbar):
    etas = np.array(etas, dtype=float).ravel()
    shape = tuple(int(s) for s in shape)
    if len(shape) != etas.size:
        raise ValueError(f"{etas.size} scalings for a {len(shape)}-dimensional grid")
    if np.any(etas <= 0) or not np.all(np.isfinite(etas)):
        raise ValueError(f"scalings must be positive, got {etas}")
    if any(s < 1 for s in shape):
        raise ValueError(f"invalid grid shape {shape}")
    if not (np.isfinite(rbar) and rbar > 0):
        raise ValueError(f"averaged coefficient must be positive, got {rbar}")
    return etas, shape, float(rbar)


class TauPreconditioner:
    """``rbar I + tau(T)``, stored as its DST-I eigenvalue tensor.

    The tau part is time independent; :meth:`with_rbar` swaps the averaged
    coefficient without recomputing it.
    """

    def __init__(self, tau_eigs: np.ndarray, rbar: float):
        tau_eigs = np.array(tau_eigs, dtype=float)
        tau_eigs.setflags(write=False)
        self.tau_eigs = tau_eigs
        self.rbar = float(rbar)
        eigs = self.rbar + tau_eigs
        if not np.all(eigs > 0):
            raise ValueError("tau preconditioner is not positive definite")
        eigs.setflags(write=False)
        self.eigenvalues = eigs

    @property
    def shape(self):
        return self.tau_eigs.shape

    def with_rbar(self, rbar: float) -> "TauPreconditioner":
        if not (np.isfinite(rbar) and rbar > 0):
            raise ValueError(f"averaged coefficient must be positive, got {rbar}")
        return TauPreconditioner(self.tau_eigs, rbar)

    def __call__(self, v):
        return apply_tau_inverse(self, v)


def build_tau(etas, alphas, shape, rbar) -> TauPreconditioner:
    etas, shape, rbar = _check_common(etas, shape, rbar)
    if len(alphas) != len(shape):
        raise ValueError(f"{len(alphas)} orders for a {len(shape)}-dimensional grid")
    lams = [tau_eigenvalues_1d(a, n) for a, n in zip(alphas, shape)]
    return TauPreconditioner(_outer_sum(lams, etas), rbar)


def apply_tau_inverse(P: TauPreconditioner, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != P.shape:
        raise ValueError(f"shape mismatch: preconditioner {P.shape}, field {v.shape}")
    return multi_dst(multi_dst(v) / P.eigenvalues)


def strang_column(c) -> np.ndarray:
    """Strang circulant column; for even ``n`` index ``n/2`` keeps ``c_{n/2}``."""
    c = np.asarray(c, dtype=float)
    n = c.size
    k = np.arange(n)
    return np.where(k <= n // 2, c[k], c[(n - k) % n])


def chan_column(c) -> np.ndarray:
    """T. Chan optimal circulant column ``((n-k) c_k + k c_{n-k}) / n``."""
    c = np.asarray(c, dtype=float)
    n = c.size
    k = np.arange(n)
    return ((n - k) * c + k * c[(n - k) % n]) / n


_COLUMN_RULES = {CirculantVariant.STRANG: strang_column, CirculantVariant.CHAN: chan_column}


def circulant_eigenvalues_1d(variant, c) -> np.ndarray:
    """DFT eigenvalues of the circulant approximation of symmetric Toeplitz ``c``."""
    column = _COLUMN_RULES[CirculantVariant(variant)](c)
    return sfft.fft(column)


class CirculantPreconditioner:
    def __init__(self, variant, base_eigs: np.ndarray, rbar: float):
        self.variant = CirculantVariant(variant)
        base_eigs = np.array(base_eigs, dtype=complex)
        base_eigs.setflags(write=False)
        self.base_eigs = base_eigs
        self.rbar = float(rbar)
        eigs = self.rbar + base_eigs
        if np.min(np.abs(eigs)) < 1e-14:
            raise ValueError("circulant preconditioner is singular")
        eigs.setflags(write=False)
        self.eigenvalues = eigs

    @property
    def shape(self):
        return self.base_eigs.shape

    def with_rbar(self, rbar: float) -> "CirculantPreconditioner":
        if not (np.isfinite(rbar) and rbar > 0):
            raise ValueError(f"averaged coefficient must be positive, got {rbar}")
        return CirculantPreconditioner(self.variant, self.base_eigs, rbar)

    def __call__(self, v):
        return apply_circulant_inverse(self, v)


def build_circulant(variant, etas, alphas, shape, rbar, columns=None) -> CirculantPreconditioner:
    """Circulant preconditioner for ``rbar I + T``.

    ``columns`` overrides the per-dimension Toeplitz first columns (default:
    the FCD4 coefficients of each order).
    """
    etas, shape, rbar = _check_common(etas, shape, rbar)
    if columns is None:
        if len(alphas) != len(shape):
            raise ValueError(f"{len(alphas)} orders for a {len(shape)}-dimensional grid")
        columns = [fcd4_coefficients(a, n - 1).values for a, n in zip(alphas, shape)]
    eigs = [circulant_eigenvalues_1d(variant, c) for c in columns]
    for e, n in zip(eigs, shape):
        if e.size != n:
            raise ValueError("circulant column length does not match grid shape")
    return CirculantPreconditioner(variant, _outer_sum(eigs, etas), rbar)


def apply_circulant_inverse(P: CirculantPreconditioner, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != P.shape:
        raise ValueError(f"shape mismatch: preconditioner {P.shape}, field {v.shape}")
    w = sfft.ifftn(sfft.fftn(v) / P.eigenvalues)
    scale = max(np.max(np.abs(w.real)), np.finfo(float).tiny)
    assert np.max(np.abs(w.imag)) <= 1e-12 * max(scale, 1.0), "circulant solve produced a complex result"
    return np.ascontiguousarray(w.real)


def build_preconditioner(kind, etas, alphas, shape, rbar):
    """Factory used by the time stepper: ``"tau"``, ``"strang"``, ``"chan"`` or ``None``."""
    if kind is None or kind == "none":
        return None
    if kind == "tau":
        return build_tau(etas, alphas, shape, rbar)
    return build_circulant(kind, etas, alphas, shape, rbar)
