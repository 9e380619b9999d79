"""Equal-weight QMC integration, the three test integrands, and a Sobol'
baseline generated from the vendored Joe-Kuo direction numbers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable

import numpy as np

__all__ = [
    "Integrand",
    "f1",
    "f2",
    "f3",
    "make_integrand",
    "exact_value",
    "integrate",
    "abs_error",
    "sobol_points",
    "sobol_capacity",
    "SOBOL_BITS",
]

SOBOL_BITS = 32


@dataclass(frozen=True)
class Integrand:
    name: str
    s: int
    params: dict = field(default_factory=dict)
    func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False, repr=False)
    exact: float | None = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.s:
            raise ValueError(f"{self.name} expects points of shape (N, {self.s}), got {x.shape}")
        return self.func(x)


def _check_s(s: int) -> None:
    if s < 1:
        raise ValueError("dimension s must be >= 1")


def f1(s: int, r: float) -> Integrand:
    """prod_j exp(-x_j / 2^(j^r))."""
    _check_s(s)
    scale = np.array([2.0 ** -(j ** r) for j in range(1, s + 1)])
    exact = math.prod(-math.expm1(-c) / c for c in scale)

    def func(x):
        return np.exp(-(x @ scale))

    return Integrand("f1", s, {"r": r}, func, exact)


def f2(s: int, w: float) -> Integrand:
    """prod_j (1 + w^j/21 (-10 + 42x^2 - 42x^5 + 21x^6)); integral 1."""
    _check_s(s)
    if not w > 0:
        raise ValueError("w must be positive")
    coef = np.array([w ** j / 21 for j in range(1, s + 1)])

    def func(x):
        x2 = x * x
        poly = -10 + x2 * (42 + x2 * x * (-42 + 21 * x))
        return np.prod(1 + coef * poly, axis=1)

    return Integrand("f2", s, {"w": w}, func, 1.0)


def f3(s: int, w: float) -> Integrand:
    """prod_j (1 + w^j/8 (31 - 84x^2 + 8x^3 + 70x^4 - 28x^6 + 8x^7
    - 16 cos 1 - 16 sin x)); integral 1."""
    _check_s(s)
    if not w > 0:
        raise ValueError("w must be positive")
    coef = np.array([w ** j / 8 for j in range(1, s + 1)])
    shift = 31 - 16 * math.cos(1.0)

    def func(x):
        x2 = x * x
        poly = shift + x2 * (-84 + x * (8 + x * (70 + x2 * (-28 + 8 * x))))
        return np.prod(1 + coef * (poly - 16 * np.sin(x)), axis=1)

    return Integrand("f3", s, {"w": w}, func, 1.0)


def make_integrand(name: str, s: int, r: float | None = None, w: float | None = None) -> Integrand:
    if name == "f1":
        if r is None:
            raise ValueError("f1 needs r")
        return f1(s, r)
    if name in ("f2", "f3"):
        if w is None:
            raise ValueError(f"{name} needs w")
        return (f2 if name == "f2" else f3)(s, w)
    raise ValueError(f"unknown integrand {name!r}")


def exact_value(f: Integrand) -> float:
    if f.exact is None:
        raise ValueError(f"no known exact value for integrand {f.name!r}")
    return f.exact


def integrate(f: Integrand, points: np.ndarray) -> float:
    """Equal-weight average of f over the points, compensated summation."""
    vals = f(points)
    return math.fsum(vals.tolist()) / vals.shape[0]


def abs_error(f: Integrand, points: np.ndarray) -> float:
    return abs(integrate(f, points) - exact_value(f))


@lru_cache(maxsize=1)
def _direction_table() -> tuple[tuple[int, int, tuple[int, ...]], ...]:
    """(degree, coefficient bits, initial m_i) for dimensions 2, 3, ..."""
    text = resources.files("qmc_ipl").joinpath("data/new-joe-kuo-6.1024.txt").read_text()
    rows = []
    for line in text.splitlines()[1:]:
        parts = line.split()
        if parts:
            s, a = int(parts[1]), int(parts[2])
            rows.append((s, a, tuple(int(v) for v in parts[3:3 + s])))
    return tuple(rows)


def sobol_capacity() -> int:
    return len(_direction_table()) + 1


def _direction_numbers(dim: int, bits: int) -> list[int]:
    """V_1..V_bits for 0-based dimension ``dim``, scaled to ``bits`` bits."""
    if dim == 0:
        return [1 << (bits - k) for k in range(1, bits + 1)]
    s, a, minit = _direction_table()[dim - 1]
    mval = list(minit)
    for k in range(s, bits):
        new = mval[k - s] ^ (mval[k - s] << s)
        for i in range(1, s):
            if (a >> (s - 1 - i)) & 1:
                new ^= mval[k - i] << i
        mval.append(new)
    return [mval[k] << (bits - 1 - k) for k in range(bits)]


def sobol_points(s: int, m: int) -> np.ndarray:
    """First 2^m points of the unscrambled Sobol' sequence, natural order."""
    _check_s(s)
    if not 0 <= m <= SOBOL_BITS:
        raise ValueError(f"m must be in [0, {SOBOL_BITS}]")
    if s > sobol_capacity():
        raise ValueError(f"dimension {s} exceeds the direction-number table ({sobol_capacity()})")
    out = np.empty((2 ** m, s))
    for j in range(s):
        V = _direction_numbers(j, SOBOL_BITS)
        X = np.zeros(2 ** m, dtype=np.uint64)
        for k in range(m):
            X[2 ** k:2 ** (k + 1)] = X[:2 ** k] ^ np.uint64(V[k])
        out[:, j] = X.astype(np.float64) / 2.0 ** SOBOL_BITS
    return out
