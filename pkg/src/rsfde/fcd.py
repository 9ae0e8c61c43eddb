"""Fractional centered difference coefficients and their symbols.

Two stencils are provided for the Riesz derivative of order ``alpha`` in
(1, 2):

* ``FCD2`` -- the classical second-order fractional centered difference,
  whose generating function is ``(4 sin^2(theta/2))**(alpha/2)``.
* ``FCD4`` -- the fourth-order variant, whose generating function carries the
  extra factor ``1 + (alpha/6) sin^2(theta/2)``.

Tables are one-sided (``k >= 0``); the stencils are even in ``k``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, gammasgn

__all__ = [
    "Order",
    "FractionalOrder",
    "CoefficientTable",
    "fcd2_coefficients",
    "fcd4_coefficients",
    "fcd2_symbol",
    "fcd4_symbol",
    "ALPHA_STAR",
]

# Approximate order at which s_2 of the FCD4 stencil changes sign.
ALPHA_STAR = 1.6516


class Order(str, enum.Enum):
    FCD4 = "fcd4"
    FCD2 = "fcd2"


@dataclass(frozen=True)
class FractionalOrder:
    """Order of a Riesz derivative, strictly inside (1, 2)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not np.isfinite(a) or not (1.0 < a < 2.0):
            raise ValueError(f"fractional order must lie in the open interval (1, 2), got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self):
        return self.alpha


def _as_alpha(alpha) -> float:
    if isinstance(alpha, FractionalOrder):
        return alpha.alpha
    return FractionalOrder(alpha).alpha


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients ``c_0, ..., c_K`` of a symmetric stencil (``c_{-k} = c_k``)."""

    alpha: float
    order: Order
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def truncation_length(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[abs(k)] if isinstance(k, (int, np.integer)) else self.values[k]

    def partial_sum(self, K: int | None = None) -> float:
        """``c_0 + 2 * sum_{k=1}^{K} c_k``."""
        K = self.truncation_length if K is None else K
        if K > self.truncation_length:
            raise ValueError(f"table holds only {self.truncation_length} terms, asked for {K}")
        return float(self.values[0] + 2.0 * self.values[1 : K + 1].sum())


def _check_K(K) -> int:
    if int(K) != K or K < 0:
        raise ValueError(f"truncation length must be a non-negative integer, got {K!r}")
    return int(K)


def _fcd2_log_gamma(alpha: float, K: int) -> np.ndarray:
    k = np.arange(K + 1, dtype=float)
    a1 = alpha / 2.0 - k + 1.0
    a2 = alpha / 2.0 + k + 1.0
    logmag = gammaln(alpha + 1.0) - gammaln(a1) - gammaln(a2)
    # Gamma(alpha/2 - k + 1) changes sign at every pole it steps past
    sign = (-1.0) ** k * gammasgn(a1)
    return sign * np.exp(logmag)


def _fcd2_recurrence(alpha: float, K: int) -> np.ndarray:
    g = np.empty(K + 1)
    g[0] = np.exp(gammaln(alpha + 1.0) - 2.0 * gammaln(alpha / 2.0 + 1.0))
    # g_{k+1} / g_k = (k - alpha/2) / (k + 1 + alpha/2)
    k = np.arange(K, dtype=float)
    g[1:] = g[0] * np.cumprod((k - alpha / 2.0) / (k + 1.0 + alpha / 2.0))
    return g


def _fcd4_factor(alpha: float, K: int) -> np.ndarray:
    k = np.arange(K + 1, dtype=float)
    return 1.0 + alpha * (alpha + 1.0) * (alpha + 2.0) / (6.0 * (alpha - 2.0 * k + 2.0) * (alpha + 2.0 * k + 2.0))


_METHODS = {"lgamma": _fcd2_log_gamma, "recurrence": _fcd2_recurrence}


def fcd2_coefficients(alpha, K: int, method: str = "lgamma") -> CoefficientTable:
    """Second-order stencil ``g_k = (-1)^k G(a+1) / (G(a/2-k+1) G(a/2+k+1))``.

    ``method`` selects log-gamma evaluation with sign tracking (``"lgamma"``)
    or the gamma-ratio recurrence (``"recurrence"``).
    """
    a = _as_alpha(alpha)
    K = _check_K(K)
    try:
        values = _METHODS[method](a, K)
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {sorted(_METHODS)}") from None
    return CoefficientTable(a, Order.FCD2, values)


def fcd4_coefficients(alpha, K: int, method: str = "lgamma") -> CoefficientTable:
    """Fourth-order stencil ``s_k = g_k * [1 + a(a+1)(a+2) / (6(a-2k+2)(a+2k+2))]``."""
    base = fcd2_coefficients(alpha, K, method=method)
    return CoefficientTable(base.alpha, Order.FCD4, base.values * _fcd4_factor(base.alpha, base.truncation_length))


def fcd2_symbol(alpha, theta):
    a = _as_alpha(alpha)
    # |2 sin|**a rather than (4 sin^2)**(a/2): no underflow for tiny theta
    return np.abs(2.0 * np.sin(np.asarray(theta, dtype=float) / 2.0)) ** a


def fcd4_symbol(alpha, theta):
    """``(1 + (a/6) sin^2(theta/2)) * (4 sin^2(theta/2))**(a/2)``."""
    a = _as_alpha(alpha)
    half = np.sin(np.asarray(theta, dtype=float) / 2.0)
    return (1.0 + a / 6.0 * half**2) * np.abs(2.0 * half) ** a
