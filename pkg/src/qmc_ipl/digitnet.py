"""Base-b digit machinery: Walsh functions, the digit metrics mu and
mu-tilde, and digit interlacing of integers (E_d) and points (D_d).

Points in [0, 1) are carried as explicit digit strings (:class:`DigitVector`
for single values, integer arrays of shape ``(..., M)`` for point sets) so
that nothing here depends on floating-point rounding.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "DigitVector",
    "int_digits",
    "walsh",
    "walsh_multi",
    "walsh_mean",
    "mu",
    "mu_tilde",
    "mu_vector",
    "mu_tilde_vector",
    "mu_tilde_table",
    "interlace_int",
    "interlace_int_blocks",
    "interlace_point",
    "interlace_blocks",
    "interlace_digit_array",
]


@dataclass(frozen=True)
class DigitVector:
    """The b-adic value ``sum(digits[i-1] * b**-i)`` held exactly."""

    base: int
    digits: tuple[int, ...]

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("base must be >= 2")
        ds = tuple(int(x) for x in self.digits)
        if any(not 0 <= x < self.base for x in ds):
            raise ValueError(f"digits must lie in [0, {self.base})")
        object.__setattr__(self, "digits", ds)

    @classmethod
    def zero(cls, b: int, precision: int) -> DigitVector:
        return cls(b, (0,) * precision)

    @classmethod
    def from_value(cls, b: int, x, precision: int) -> DigitVector:
        """Leading ``precision`` digits of ``x`` in [0, 1).

        ``x`` may be a float or a :class:`~fractions.Fraction`; floats are
        expanded exactly, so ``from_value(2, 0.75, 3)`` gives digits (1, 1, 0).
        """
        fx = Fraction(x)
        if not 0 <= fx < 1:
            raise ValueError(f"value {x} is outside [0, 1)")
        digits = []
        for _ in range(precision):
            fx *= b
            dgt = int(fx)
            digits.append(dgt)
            fx -= dgt
        return cls(b, tuple(digits))

    @property
    def precision(self) -> int:
        return len(self.digits)

    def to_int(self) -> int:
        """The integer b**M * value."""
        v = 0
        for dgt in self.digits:
            v = v * self.base + dgt
        return v

    def to_fraction(self) -> Fraction:
        return Fraction(self.to_int(), self.base ** self.precision)

    def __float__(self) -> float:
        # int / int is correctly rounded; exact when M * log2(b) <= 52.
        return self.to_int() / self.base ** self.precision

    def padded(self, precision: int) -> DigitVector:
        if precision <= self.precision:
            return self
        return DigitVector(self.base, self.digits + (0,) * (precision - self.precision))


def int_digits(k: int, b: int, length: int | None = None) -> list[int]:
    """Base-b digits of ``k``, least significant first."""
    if k < 0:
        raise ValueError("k must be non-negative")
    out = []
    while k:
        k, r = divmod(k, b)
        out.append(r)
    if length is not None:
        if len(out) > length:
            raise ValueError(f"{k} has more than {length} digits")
        out += [0] * (length - len(out))
    return out


def walsh(b: int, k: int, x: DigitVector):
    """The k-th b-adic Walsh function at x.

    Returns an ``int`` (+1 or -1) for b = 2 and a ``complex`` root of unity
    otherwise.  Digits of ``x`` beyond its precision are taken as zero.
    """
    if x.base != b:
        raise ValueError("digit base does not match b")
    kd = int_digits(k, b)
    e = 0
    for i, kappa in enumerate(kd):
        if kappa and i < x.precision:
            e += kappa * x.digits[i]
    e %= b
    if b == 2:
        return -1 if e else 1
    return cmath.exp(2j * math.pi * e / b)


def walsh_multi(b: int, k: Sequence[int], x: Sequence[DigitVector]):
    if len(k) != len(x):
        raise ValueError(f"length mismatch: {len(k)} vs {len(x)}")
    out = 1
    for kj, xj in zip(k, x):
        out *= walsh(b, kj, xj)
    return out


def walsh_mean(b: int, k: Sequence[int], digits: np.ndarray) -> complex:
    """Average of wal_k over a point set given as digits of shape (N, s, M).

    This is the empirical character sum that decides dual-lattice
    membership; it is exact in the exponent and only rounds when the
    roots of unity are summed.
    """
    digits = np.asarray(digits)
    n_pts, s, M = digits.shape
    if len(k) != s:
        raise ValueError(f"k has length {len(k)}, points have dimension {s}")
    e = np.zeros(n_pts, dtype=np.int64)
    for j, kj in enumerate(k):
        for i, kappa in enumerate(int_digits(int(kj), b)):
            if kappa and i < M:
                e += kappa * digits[:, j, i].astype(np.int64)
    e %= b
    if b == 2:
        return float(np.sum(1 - 2 * e)) / n_pts
    counts = np.bincount(e, minlength=b)
    omega = np.exp(2j * np.pi * np.arange(b) / b)
    return complex(np.dot(counts, omega) / n_pts)


def _positions(k: int, b: int) -> list[int]:
    """1-based positions c of the nonzero base-b digits of k."""
    return [i + 1 for i, kappa in enumerate(int_digits(k, b)) if kappa]


def mu(a: float, k: int, b: int) -> float:
    """sum over nonzero digits of k at position c (1-based) of (c + a)."""
    return float(sum(c + a for c in _positions(k, b)))


def mu_tilde(a: float, h: int, d: int, k: int, b: int) -> float:
    """Interlacing-aware metric: sum of d*(c-1) + h + a over nonzero digits."""
    if d < 1:
        raise ValueError("interlacing factor d must be >= 1")
    if not 1 <= h <= d:
        raise ValueError(f"h must satisfy 1 <= h <= d, got h={h}, d={d}")
    return float(sum(d * (c - 1) + h + a for c in _positions(k, b)))


def mu_vector(a: Sequence[float], k: Sequence[int], b: int) -> float:
    if len(a) < len(k):
        raise ValueError(f"need {len(k)} exponents, got {len(a)}")
    return float(sum(mu(aj, kj, b) for aj, kj in zip(a, k)))


def mu_tilde_vector(a: Sequence[float], d: int, k: Sequence[int], b: int) -> float:
    """Sum over blocks j and slots h of mu_tilde(a_j, h; k_{d(j-1)+h})."""
    if len(k) % d:
        raise ValueError(f"length {len(k)} is not a multiple of d={d}")
    s = len(k) // d
    if len(a) < s:
        raise ValueError(f"need {s} exponents, got {len(a)}")
    total = 0.0
    for t, kt in enumerate(k):
        j, h = divmod(t, d)
        total += mu_tilde(a[j], h + 1, d, kt, b)
    return total


def mu_tilde_table(a: float, h: int, d: int, m: int, b: int) -> np.ndarray:
    """mu_tilde(a, h; k) for every k in [0, b**m), as a float array."""
    if not 1 <= h <= d:
        raise ValueError(f"h must satisfy 1 <= h <= d, got h={h}, d={d}")
    k = np.arange(b ** m, dtype=np.int64)
    out = np.zeros(b ** m)
    for c in range(1, m + 1):
        nonzero = (k // b ** (c - 1)) % b != 0
        out += np.where(nonzero, d * (c - 1) + h + a, 0.0)
    return out


def interlace_int(d: int, k: Sequence[int], b: int) -> int:
    """E_d: digit kappa_{i,j} of k_j moves to position d*i + j - 1."""
    if len(k) != d:
        raise ValueError(f"expected {d} integers, got {len(k)}")
    digs = [int_digits(int(kj), b) for kj in k]
    out = 0
    for j, dj in enumerate(digs):
        for i, kappa in enumerate(dj):
            out += kappa * b ** (d * i + j)
    return out


def interlace_int_blocks(d: int, s: int, k: Sequence[int], b: int) -> list[int]:
    if len(k) != d * s:
        raise ValueError(f"expected {d * s} integers, got {len(k)}")
    return [interlace_int(d, k[d * j:d * (j + 1)], b) for j in range(s)]


def interlace_point(d: int, x: Sequence[DigitVector]) -> DigitVector:
    """D_d: digit i of input j moves to output position d*(i-1) + j."""
    if len(x) != d:
        raise ValueError(f"expected {d} coordinates, got {len(x)}")
    precisions = {xj.precision for xj in x}
    bases = {xj.base for xj in x}
    if len(precisions) != 1 or len(bases) != 1:
        raise ValueError("coordinates must share base and precision")
    M = precisions.pop()
    digits = [x[j].digits[i] for i in range(M) for j in range(d)]
    return DigitVector(bases.pop(), tuple(digits))


def interlace_blocks(d: int, s: int, x: Sequence[DigitVector]) -> list[DigitVector]:
    if len(x) != d * s:
        raise ValueError(f"expected {d * s} coordinates, got {len(x)}")
    return [interlace_point(d, x[d * j:d * (j + 1)]) for j in range(s)]


def interlace_digit_array(digits: np.ndarray, d: int) -> np.ndarray:
    """Vectorised D_d on digits of shape (N, d*s, M) -> (N, s, d*M)."""
    digits = np.asarray(digits)
    n_pts, ds, M = digits.shape
    if ds % d:
        raise ValueError(f"dimension {ds} is not a multiple of d={d}")
    s = ds // d
    # (N, s, d, M) -> (N, s, M, d): output position d*(i-1) + j
    return digits.reshape(n_pts, s, d, M).transpose(0, 1, 3, 2).reshape(n_pts, s, d * M)
