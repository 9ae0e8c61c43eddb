"""Matrix-free symmetric Toeplitz and Kronecker-sum operators, plus DST-I.

Grid fields are numpy arrays of shape ``(n_1, ..., n_d)``.  Their linearized
form is the C-order ravel, so the slowest index is ``j_1`` and the Kronecker
factor ``I_{n_i^-} (x) S_i (x) I_{n_i^+}`` acts along array axis ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft as sfft

__all__ = [
    "SymmetricToeplitz1D",
    "KroneckerSumOperator",
    "toeplitz_matvec_1d",
    "apply_operator",
    "dst1",
    "multi_dst",
]


@dataclass(frozen=True, eq=False)
class SymmetricToeplitz1D:
    """Symmetric Toeplitz matrix stored by its first column."""

    column: np.ndarray

    def __post_init__(self):
        c = np.array(self.column, dtype=float).ravel()
        if c.size == 0:
            raise ValueError("Toeplitz column must be non-empty")
        c.setflags(write=False)
        object.__setattr__(self, "column", c)
        # Circulant of length 2n: [c_0, ..., c_{n-1}, 0, c_{n-1}, ..., c_1].
        emb = np.concatenate([c, [0.0], c[:0:-1]])
        eig = sfft.rfft(emb)
        eig.setflags(write=False)
        object.__setattr__(self, "_embedding_eigs", eig)

    @classmethod
    def from_table(cls, table, n: int) -> "SymmetricToeplitz1D":
        """Top-left ``n x n`` section of the Toeplitz matrix of a coefficient table."""
        if table.truncation_length < n - 1:
            raise ValueError(f"coefficient table has {len(table)} terms, matrix of order {n} needs {n}")
        return cls(table.values[:n])

    @property
    def n(self) -> int:
        return self.column.size

    def matvec(self, v, axis: int = -1) -> np.ndarray:
        """Apply along ``axis`` of ``v`` (all fibers batched in one transform)."""
        v = np.asarray(v, dtype=float)
        n = self.n
        if v.shape[axis] != n:
            raise ValueError(f"length mismatch: operator order {n}, vector axis has {v.shape[axis]}")
        shape = [1] * v.ndim
        shape[axis] = -1
        V = sfft.rfft(v, n=2 * n, axis=axis)
        out = sfft.irfft(V * self._embedding_eigs.reshape(shape), n=2 * n, axis=axis)
        return np.take(out, np.arange(n), axis=axis)

    def dense(self) -> np.ndarray:
        from scipy.linalg import toeplitz

        return toeplitz(self.column)


def toeplitz_matvec_1d(t: SymmetricToeplitz1D, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    return t.matvec(v)


class KroneckerSumOperator:
    """``T = sum_i eta_i  I (x) S_i (x) I`` with ``S_i`` acting along axis ``i``."""

    def __init__(self, blocks: Sequence[SymmetricToeplitz1D], etas: Sequence[float]):
        blocks = tuple(blocks)
        etas = np.array(etas, dtype=float).ravel()
        if len(blocks) == 0:
            raise ValueError("need at least one block")
        if len(blocks) != etas.size:
            raise ValueError(f"{len(blocks)} blocks but {etas.size} scalings")
        if np.any(~np.isfinite(etas)) or np.any(etas <= 0):
            raise ValueError(f"scalings must be positive, got {etas}")
        etas.setflags(write=False)
        self.blocks = blocks
        self.etas = etas

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(b.n for b in self.blocks)

    @property
    def ndim(self) -> int:
        return len(self.blocks)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def scaled(self, factor: float) -> "KroneckerSumOperator":
        return KroneckerSumOperator(self.blocks, self.etas * factor)

    def __call__(self, u):
        return apply_operator(self, u)

    def __repr__(self):
        return f"KroneckerSumOperator(shape={self.shape}, etas={self.etas.tolist()})"


def apply_operator(T: KroneckerSumOperator, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != T.shape:
        raise ValueError(f"shape mismatch: operator {T.shape}, field {u.shape}")
    out = np.zeros_like(u)
    for axis, (block, eta) in enumerate(zip(T.blocks, T.etas)):
        out += eta * block.matvec(u, axis=axis)
    return out


def dst1(v) -> np.ndarray:
    """Orthonormal DST-I: ``sqrt(2/(n+1)) sum_k v_k sin(j k pi / (n+1))``; involutive."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a non-empty vector, got shape {v.shape}")
    return sfft.dst(v, type=1, norm="ortho")


def multi_dst(u) -> np.ndarray:
    """DST-I along every axis."""
    return sfft.dstn(np.asarray(u, dtype=float), type=1, norm="ortho")
