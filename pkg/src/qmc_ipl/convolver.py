"""Circulant matrix-vector products of arbitrary length.

A circulant with first column ``col`` acts as cyclic convolution.  For
N >= 64 the cyclic product is obtained from a linear convolution computed
with power-of-two real FFTs of length >= 2N - 1, then folded modulo N.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["CirculantPlan", "circulant_multiply", "DIRECT_THRESHOLD"]

DIRECT_THRESHOLD = 64


@dataclass(frozen=True)
class CirculantPlan:
    n: int
    fft_len: int  # 0 selects direct summation

    @property
    def direct(self) -> bool:
        return self.fft_len == 0

    @classmethod
    @lru_cache(maxsize=64)
    def for_length(cls, n: int) -> CirculantPlan:
        if n < 1:
            raise ValueError("length must be positive")
        if n < DIRECT_THRESHOLD:
            return cls(n, 0)
        return cls(n, 1 << (2 * n - 2).bit_length())

    @property
    def scratch_values(self) -> int:
        """Floats of temporary storage one product needs."""
        return 0 if self.direct else 3 * self.fft_len

    def multiply(self, col: np.ndarray, v: np.ndarray) -> np.ndarray:
        col = np.asarray(col, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        n = self.n
        if col.shape != (n,) or v.shape != (n,):
            raise ValueError(f"expected two vectors of length {n}, got {col.shape} and {v.shape}")
        if self.direct:
            lin = np.convolve(col, v)
        else:
            L = self.fft_len
            lin = np.fft.irfft(np.fft.rfft(col, L) * np.fft.rfft(v, L), L)
        out = lin[:n].copy()
        out[: n - 1] += lin[n:2 * n - 1]
        return out


def circulant_multiply(first_column, v) -> np.ndarray:
    """out[i] = sum_n col[(i - n) mod N] * v[n]."""
    first_column = np.asarray(first_column)
    v = np.asarray(v)
    if first_column.shape != v.shape or first_column.ndim != 1:
        raise ValueError(f"length mismatch: {first_column.shape} vs {v.shape}")
    return CirculantPlan.for_length(first_column.shape[0]).multiply(first_column, v)
