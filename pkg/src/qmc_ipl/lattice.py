"""Polynomial lattice point sets, their dual lattices, and interlacing.

Coordinate j of point n is v_m(n(x) q_j(x) / p(x)): the first m
coefficients t_1..t_m of the formal Laurent expansion in x^-1, read as
base-b digits.  Two routes compute them:

* :func:`laurent_digits` / :func:`lattice_point` perform synthetic
  division for one numerator at a time (the reference path);
* :func:`coordinate_ints` produces b^m * v_m(n q / p) for all n at once,
  using that the digit map is Z_b-linear in the digits of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from . import gfpoly
from .digitnet import DigitVector, interlace_digit_array
from .errors import InvalidRuleError
from .gfpoly import GFPolynomial

if TYPE_CHECKING:
    from .criterion import WeightProfile

__all__ = [
    "MAX_EXACT_BITS",
    "RuleSpec",
    "PointSet",
    "InvalidRuleError",
    "laurent_digits",
    "lattice_point",
    "coordinate_ints",
    "ints_to_digits",
    "lattice_digits",
    "generate_point_set",
    "in_dual",
    "truncate_m",
    "digits_to_float",
    "format_point_file",
    "write_point_file",
    "read_point_file",
]

MAX_EXACT_BITS = 52


def laurent_digits(a: int, p: int, b: int, m: int) -> list[int]:
    """Coefficients t_1..t_m of (a mod p) / p in Z_b((x^-1)).

    ``a`` and ``p`` are integer encodings.  Each step multiplies the
    running remainder by x and removes t_l * p, so t_l is the degree-m
    coefficient of the remainder divided by the leading coefficient of p.
    """
    pc = gfpoly._to_coeffs(p, b)
    if len(pc) - 1 != m:
        raise ValueError(f"modulus has degree {len(pc) - 1}, expected {m}")
    inv_lead = pow(pc[-1], -1, b)
    r = gfpoly._to_coeffs(gfpoly.mod_int(a, p, b), b)
    r += [0] * (m + 1 - len(r))
    out = []
    for _ in range(m):
        r = [0] + r[:m]  # times x; degree stays <= m
        t = r[m] * inv_lead % b
        if t:
            r = [(ri - t * pi) % b for ri, pi in zip(r, pc)]
        out.append(t)
    return out


def lattice_point(p: GFPolynomial, q: Sequence[GFPolynomial], n: int) -> list[DigitVector]:
    """The n-th point of P(q, p) as m-digit coordinates."""
    b = p.base
    m = len(p.coeffs) - 1
    if not 0 <= n < b ** m:
        raise ValueError(f"index n={n} outside [0, {b ** m})")
    out = []
    for qj in q:
        num = gfpoly.mul_int(n, qj.enc, b)
        out.append(DigitVector(b, tuple(laurent_digits(num, p.enc, b, m))))
    return out


def _digit_add(x: np.ndarray, y, b: int, m: int) -> np.ndarray:
    """Digitwise sum mod b of m-digit integer encodings."""
    if b == 2:
        return np.bitwise_xor(x, y)
    out = np.zeros_like(x)
    scale = 1
    for _ in range(m):
        out += ((x // scale + y // scale) % b) * scale
        scale *= b
    return out


def _digit_scale(x: int, c: int, b: int, m: int) -> int:
    out, scale = 0, 1
    for _ in range(m):
        out += ((x // scale) % b * c % b) * scale
        scale *= b
    return out


def coordinate_ints(p: int, q: int, b: int, m: int) -> np.ndarray:
    """Array X with X[n] = b**m * v_m(n q / p) for n = 0..b**m - 1.

    Built by doubling over the digits of n: with n = n' + c b^j (n' < b^j)
    the Laurent digits of n q / p are the digitwise sum of those of n' q / p
    and c times those of x^j q / p.
    """
    if b ** m >= 2 ** 62:
        raise ValueError("b**m too large for int64 digit encodings")
    X = np.zeros(b ** m, dtype=np.int64)
    mono = gfpoly.mod_int(q, p, b)
    size = 1
    for _ in range(m):
        basis = 0
        for t in laurent_digits(mono, p, b, m):
            basis = basis * b + t
        for c in range(1, b):
            X[c * size:(c + 1) * size] = _digit_add(X[:size], _digit_scale(basis, c, b, m), b, m)
        size *= b
        mono = gfpoly.mulmod_int(mono, b, p, b)  # times x
    return X


def ints_to_digits(X: np.ndarray, b: int, m: int) -> np.ndarray:
    """Digit array (..., m), most significant (t_1) first."""
    X = np.asarray(X, dtype=np.int64)
    out = np.empty(X.shape + (m,), dtype=np.uint8)
    for i in range(m):
        out[..., i] = (X // b ** (m - 1 - i)) % b
    return out


def lattice_digits(p: GFPolynomial, q: Sequence[GFPolynomial]) -> np.ndarray:
    """All points of P(q, p) as digits of shape (b^m, len(q), m)."""
    b = p.base
    m = len(p.coeffs) - 1
    cols = [ints_to_digits(coordinate_ints(p.enc, qj.enc, b, m), b, m) for qj in q]
    return np.stack(cols, axis=1)


def truncate_m(k: int, b: int, m: int) -> int:
    """tr_m on integer encodings: keep the low m base-b digits."""
    return k % b ** m


def in_dual(p: GFPolynomial, q: Sequence[GFPolynomial], k: Sequence[int]) -> bool:
    """Whether tr_m(k) . q = 0 mod p."""
    if len(k) != len(q):
        raise ValueError(f"length mismatch: {len(k)} vs {len(q)}")
    b = p.base
    m = len(p.coeffs) - 1
    acc = GFPolynomial(b)
    for kj, qj in zip(k, q):
        acc = acc + GFPolynomial.from_int(b, truncate_m(int(kj), b, m)) * qj
    return (acc % p).is_zero()


@dataclass(frozen=True)
class RuleSpec:
    """An interlaced polynomial lattice rule.

    ``q`` has ``d * s`` entries; consecutive groups of ``d`` are woven into
    one output coordinate.  Invariants are checked on construction.
    """

    b: int
    m: int
    s: int
    d: int
    p: GFPolynomial
    q: tuple[GFPolynomial, ...]
    weights: WeightProfile | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(self.q))
        if self.d < 1:
            raise InvalidRuleError(f"interlacing factor must be >= 1, got {self.d}")
        if self.m < 1 or self.s < 1:
            raise InvalidRuleError("m and s must be >= 1")
        if self.p.base != self.b or len(self.p.coeffs) - 1 != self.m:
            raise InvalidRuleError(f"modulus must be a degree-{self.m} polynomial over Z_{self.b}")
        if not gfpoly.is_irreducible(self.p):
            raise InvalidRuleError(f"modulus {self.p!r} is not irreducible")
        if len(self.q) != self.d * self.s:
            raise InvalidRuleError(f"need d*s = {self.d * self.s} generators, got {len(self.q)}")
        for qj in self.q:
            if qj.base != self.b or qj.is_zero() or len(qj.coeffs) - 1 >= self.m:
                raise InvalidRuleError(f"generator {qj!r} is not a nonzero polynomial of degree < {self.m}")

    @property
    def n_points(self) -> int:
        return self.b ** self.m

    @property
    def precision(self) -> int:
        """Digits per output coordinate (d * m)."""
        return self.d * self.m

    @property
    def exact_in_binary64(self) -> bool:
        return self.precision * math.log2(self.b) <= MAX_EXACT_BITS

    def prefix(self, s: int) -> RuleSpec:
        """The rule restricted to its first ``s`` output coordinates."""
        if not 1 <= s <= self.s:
            raise ValueError(f"s must be in [1, {self.s}]")
        return RuleSpec(self.b, self.m, s, self.d, self.p, self.q[: self.d * s], self.weights)


def digits_to_float(digits: np.ndarray, b: int) -> np.ndarray:
    """Convert digit arrays (..., M) to binary64, truncating (never rounding
    up) any digits beyond what binary64 holds exactly."""
    M = digits.shape[-1]
    K = M
    while K > 0 and b ** K > 2 ** 53:
        K -= 1
    X = np.zeros(digits.shape[:-1], dtype=np.int64)
    for i in range(K):
        X = X * b + digits[..., i]
    x = X.astype(np.float64) / float(b ** K)
    return np.minimum(x, np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class PointSet:
    """Interlaced points held as digits of shape (b^m, s, d*m)."""

    b: int
    m: int
    s: int
    d: int
    digits: np.ndarray

    @property
    def n_points(self) -> int:
        return self.digits.shape[0]

    def to_float(self, allow_extended: bool = False) -> np.ndarray:
        if not allow_extended and self.digits.shape[-1] * math.log2(self.b) > MAX_EXACT_BITS:
            raise InvalidRuleError(
                f"d*m = {self.digits.shape[-1]} digits exceed binary64 precision; "
                "pass allow_extended=True to truncate")
        return digits_to_float(self.digits, self.b)

    def digit_vector(self, n: int, j: int) -> DigitVector:
        return DigitVector(self.b, tuple(int(v) for v in self.digits[n, j]))


def generate_point_set(spec: RuleSpec) -> PointSet:
    """D_d(P(q, p)) in index order n = 0..b^m - 1."""
    raw = lattice_digits(spec.p, spec.q)
    return PointSet(spec.b, spec.m, spec.s, spec.d, interlace_digit_array(raw, spec.d))


def format_point_file(points: PointSet, allow_extended: bool = False) -> str:
    """One point per line, space-separated, after a ``# b m s d N`` header."""
    x = points.to_float(allow_extended)
    lines = [f"# {points.b} {points.m} {points.s} {points.d} {points.n_points}"]
    lines += [" ".join(format(v, ".17g") for v in row) for row in x.tolist()]
    return "\n".join(lines) + "\n"


def write_point_file(points: PointSet, path, allow_extended: bool = False) -> None:
    Path(path).write_text(format_point_file(points, allow_extended))


def read_point_file(path) -> tuple[dict, np.ndarray]:
    text = Path(path).read_text().splitlines()
    b, m, s, d, n = (int(v) for v in text[0].lstrip("#").split())
    rows = [[float(v) for v in line.split()] for line in text[1:] if line.strip()]
    x = np.array(rows, dtype=np.float64).reshape(n, s)
    return {"b": b, "m": m, "s": s, "d": d, "N": n}, x


def iter_slots(d: int, s: int) -> Iterable[tuple[int, int]]:
    """(block j, slot h) pairs, both 1-based, in generator order."""
    for j in range(1, s + 1):
        for h in range(1, d + 1):
            yield j, h
