"""Polynomials over the prime field Z_b.

A polynomial is identified with the non-negative integer whose base-b
digits are its coefficients, constant term least significant.  For
example over Z_2 the integer 19 = 10011_2 is x^4 + x + 1.  This encoding
orders polynomials canonically and is what rule files store.

Two layers are provided: the immutable :class:`GFPolynomial` value type,
and ``*_int`` helpers working directly on integer encodings, which the
lattice and construction code use in their inner loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

__all__ = [
    "GFPolynomial",
    "add",
    "sub",
    "mul",
    "mulmod",
    "powmod",
    "inner_product",
    "is_irreducible",
    "is_irreducible_trial",
    "smallest_irreducible",
    "find_primitive",
    "multiplicative_order",
    "prime_factors",
    "is_prime",
    "mul_int",
    "mod_int",
    "mulmod_int",
    "powmod_int",
    "degree_int",
]

ZERO_DEGREE = -math.inf


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``n`` by trial division, ascending."""
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _check_base(b: int) -> None:
    if not is_prime(b):
        raise ValueError(f"base must be a prime, got {b}")


# ---------------------------------------------------------------------------
# integer-encoding layer

def _to_coeffs(enc: int, b: int) -> list[int]:
    cs = []
    while enc:
        enc, c = divmod(enc, b)
        cs.append(c)
    return cs


def _from_coeffs(cs: Sequence[int], b: int) -> int:
    enc = 0
    for c in reversed(cs):
        enc = enc * b + c
    return enc


def degree_int(enc: int, b: int) -> int:
    """Degree of an encoded polynomial; -1 for zero (internal use only)."""
    if b == 2:
        return enc.bit_length() - 1
    d = -1
    while enc:
        enc //= b
        d += 1
    return d


def _strip(cs: list[int]) -> list[int]:
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def _mul_coeffs(a: Sequence[int], c: Sequence[int], b: int) -> list[int]:
    if not a or not c:
        return []
    out = [0] * (len(a) + len(c) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, cj in enumerate(c):
                out[i + j] = (out[i + j] + ai * cj) % b
    return _strip(out)


def _divmod_coeffs(a: Sequence[int], p: Sequence[int], b: int) -> tuple[list[int], list[int]]:
    if not p:
        raise ZeroDivisionError("division by the zero polynomial")
    r = list(a)
    dp = len(p) - 1
    inv_lead = pow(p[-1], -1, b)
    if len(r) <= dp:
        return [], _strip(r)
    quo = [0] * (len(r) - dp)
    for k in range(len(r) - 1, dp - 1, -1):
        c = r[k] * inv_lead % b
        if c:
            quo[k - dp] = c
            shift = k - dp
            for i, pi in enumerate(p):
                r[shift + i] = (r[shift + i] - c * pi) % b
    return _strip(quo), _strip(r[:dp])


def _mul2(a: int, c: int) -> int:
    if a < c:
        a, c = c, a
    out = 0
    while c:
        if c & 1:
            out ^= a
        a <<= 1
        c >>= 1
    return out


def _mod2(a: int, p: int) -> int:
    dp = p.bit_length() - 1
    da = a.bit_length() - 1
    while da >= dp:
        a ^= p << (da - dp)
        da = a.bit_length() - 1
    return a


def mul_int(a: int, c: int, b: int) -> int:
    if b == 2:
        return _mul2(a, c)
    return _from_coeffs(_mul_coeffs(_to_coeffs(a, b), _to_coeffs(c, b), b), b)


def mod_int(a: int, p: int, b: int) -> int:
    if p == 0:
        raise ZeroDivisionError("reduction modulo the zero polynomial")
    if b == 2:
        return _mod2(a, p)
    return _from_coeffs(_divmod_coeffs(_to_coeffs(a, b), _to_coeffs(p, b), b)[1], b)


def mulmod_int(a: int, c: int, p: int, b: int) -> int:
    return mod_int(mul_int(a, c, b), p, b)


def powmod_int(a: int, e: int, p: int, b: int) -> int:
    result = mod_int(1, p, b)
    a = mod_int(a, p, b)
    while e:
        if e & 1:
            result = mulmod_int(result, a, p, b)
        a = mulmod_int(a, a, p, b)
        e >>= 1
    return result


def _gcd_int(a: int, c: int, b: int) -> int:
    while c:
        a, c = c, mod_int(a, c, b)
    return a


# ---------------------------------------------------------------------------
# value type

@dataclass(frozen=True)
class GFPolynomial:
    """Immutable polynomial over Z_b; ``coeffs[i]`` is the coefficient of x^i.

    The constructor reduces coefficients mod b and strips trailing zeros, so
    ``GFPolynomial(2, (1, 1, 0))`` and ``GFPolynomial(2, (1, 3))`` are both
    x + 1.  The zero polynomial has empty ``coeffs``.
    """

    base: int
    coeffs: tuple[int, ...] = ()

    def __post_init__(self):
        _check_base(self.base)
        cs = _strip([int(c) % self.base for c in self.coeffs])
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_int(cls, b: int, enc: int) -> GFPolynomial:
        if enc < 0:
            raise ValueError("integer encoding must be non-negative")
        return cls(b, tuple(_to_coeffs(enc, b)))

    @classmethod
    def x(cls, b: int) -> GFPolynomial:
        return cls(b, (0, 1))

    @classmethod
    def one(cls, b: int) -> GFPolynomial:
        return cls(b, (1,))

    @property
    def enc(self) -> int:
        return _from_coeffs(self.coeffs, self.base)

    def __int__(self) -> int:
        return self.enc

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self):
        """Degree, or ``-inf`` for the zero polynomial."""
        return len(self.coeffs) - 1 if self.coeffs else ZERO_DEGREE

    def _same_base(self, other: GFPolynomial) -> None:
        if not isinstance(other, GFPolynomial):
            raise TypeError(f"expected GFPolynomial, got {type(other).__name__}")
        if other.base != self.base:
            raise ValueError(f"base mismatch: {self.base} vs {other.base}")

    def __add__(self, other: GFPolynomial) -> GFPolynomial:
        return add(self, other)

    def __sub__(self, other: GFPolynomial) -> GFPolynomial:
        return sub(self, other)

    def __neg__(self) -> GFPolynomial:
        return GFPolynomial(self.base, tuple(-c for c in self.coeffs))

    def __mul__(self, other: GFPolynomial) -> GFPolynomial:
        return mul(self, other)

    def __divmod__(self, other: GFPolynomial) -> tuple[GFPolynomial, GFPolynomial]:
        self._same_base(other)
        q, r = _divmod_coeffs(self.coeffs, other.coeffs, self.base)
        return GFPolynomial(self.base, tuple(q)), GFPolynomial(self.base, tuple(r))

    def __floordiv__(self, other: GFPolynomial) -> GFPolynomial:
        return divmod(self, other)[0]

    def __mod__(self, other: GFPolynomial) -> GFPolynomial:
        return divmod(self, other)[1]

    def __call__(self, x: int) -> int:
        """Evaluate at an element of Z_b."""
        v = 0
        for c in reversed(self.coeffs):
            v = (v * x + c) % self.base
        return v

    def to_json(self) -> dict:
        return {"b": self.base, "enc": self.enc}

    @classmethod
    def from_json(cls, obj: dict) -> GFPolynomial:
        return cls.from_int(int(obj["b"]), int(obj["enc"]))

    def __repr__(self) -> str:
        if not self.coeffs:
            return f"GFPolynomial({self.base}, 0)"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mono = "1" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if c != 1:
                mono = f"{c}" if i == 0 else f"{c}*{mono}"
            terms.append(mono)
        return f"GFPolynomial({self.base}, {' + '.join(terms)})"


def add(a: GFPolynomial, b: GFPolynomial) -> GFPolynomial:
    a._same_base(b)
    n = max(len(a.coeffs), len(b.coeffs))
    ca = a.coeffs + (0,) * (n - len(a.coeffs))
    cb = b.coeffs + (0,) * (n - len(b.coeffs))
    return GFPolynomial(a.base, tuple(x + y for x, y in zip(ca, cb)))


def sub(a: GFPolynomial, b: GFPolynomial) -> GFPolynomial:
    return add(a, -b)


def mul(a: GFPolynomial, b: GFPolynomial) -> GFPolynomial:
    a._same_base(b)
    return GFPolynomial(a.base, tuple(_mul_coeffs(a.coeffs, b.coeffs, a.base)))


def mulmod(a: GFPolynomial, b: GFPolynomial, p: GFPolynomial) -> GFPolynomial:
    """``(a * b) mod p``; raises ``ZeroDivisionError`` for a zero modulus."""
    a._same_base(b)
    a._same_base(p)
    if p.is_zero():
        raise ZeroDivisionError("modulus is the zero polynomial")
    return (a * b) % p


def powmod(a: GFPolynomial, e: int, p: GFPolynomial) -> GFPolynomial:
    a._same_base(p)
    if p.is_zero():
        raise ZeroDivisionError("modulus is the zero polynomial")
    return GFPolynomial.from_int(a.base, powmod_int(a.enc, e, p.enc, a.base))


def inner_product(k: Sequence[GFPolynomial], q: Sequence[GFPolynomial]) -> GFPolynomial:
    """Sum of ``k[j] * q[j]`` in Z_b[x], without reduction."""
    if len(k) != len(q):
        raise ValueError(f"length mismatch: {len(k)} vs {len(q)}")
    if not k:
        raise ValueError("empty vectors have no base")
    total = GFPolynomial(k[0].base)
    for kj, qj in zip(k, q):
        total = total + kj * qj
    return total


# ---------------------------------------------------------------------------
# irreducibility and primitive elements

def _x_power_b_power(i: int, p: int, b: int) -> int:
    """x^(b^i) mod p, by i repeated b-th powers."""
    r = mod_int(b, p, b)  # the encoding of x is b
    for _ in range(i):
        r = powmod_int(r, b, p, b)
    return r


def _sub_x(a: int, b: int) -> int:
    cs = _to_coeffs(a, b) + [0, 0]
    cs[1] = (cs[1] - 1) % b
    return _from_coeffs(_strip(cs), b)


def _is_irreducible_enc(p: int, b: int) -> bool:
    m = degree_int(p, b)
    if m < 1:
        return False
    if m == 1:
        return True
    # Rabin: x^(b^m) = x mod p, and gcd(x^(b^(m/l)) - x, p) = 1 for primes l | m.
    if _x_power_b_power(m, p, b) != mod_int(b, p, b):
        return False
    for ell in prime_factors(m):
        h = _sub_x(_x_power_b_power(m // ell, p, b), b)
        if degree_int(_gcd_int(p, h, b), b) > 0:
            return False
    return True


def is_irreducible(p: GFPolynomial) -> bool:
    """Deterministic irreducibility test (Rabin's criterion).

    Polynomials of degree < 1 are reported as not irreducible.
    """
    return _is_irreducible_enc(p.enc, p.base)


def is_irreducible_trial(p: GFPolynomial) -> bool:
    """Irreducibility by trial division against every monic polynomial of
    degree 1..deg(p)//2.  Exponential in deg(p); kept as a cross-check."""
    b = p.base
    m = len(p.coeffs) - 1
    if m < 1:
        return False
    enc = p.enc
    for deg in range(1, m // 2 + 1):
        lead = b ** deg
        for low in range(lead):
            if mod_int(enc, lead + low, b) == 0:
                return False
    return True


@lru_cache(maxsize=None)
def _smallest_irreducible_enc(b: int, m: int) -> int:
    lo = b ** m
    for enc in range(lo, 2 * lo):  # monic, degree m, ascending encoding
        if _is_irreducible_enc(enc, b):
            return enc
    raise AssertionError("unreachable: irreducible polynomials exist in every degree")


def smallest_irreducible(b: int, m: int) -> GFPolynomial:
    """Irreducible polynomial of degree ``m`` over Z_b with minimal encoding.

    The minimum is always attained by a monic polynomial, since scaling by a
    unit can only raise the leading digit.
    """
    _check_base(b)
    if m < 1:
        raise ValueError(f"degree must be >= 1, got {m}")
    return GFPolynomial.from_int(b, _smallest_irreducible_enc(b, m))


def multiplicative_order(g: GFPolynomial, p: GFPolynomial) -> int:
    """Order of g in (Z_b[x]/p)^*, assuming p irreducible and g != 0 mod p."""
    b = p.base
    n = b ** (len(p.coeffs) - 1) - 1
    ge = mod_int(g.enc, p.enc, b)
    if ge == 0:
        raise ValueError("zero has no multiplicative order")
    order = n
    for ell in prime_factors(n):
        while order % ell == 0 and powmod_int(ge, order // ell, p.enc, b) == 1:
            order //= ell
    return order


@lru_cache(maxsize=None)
def _find_primitive_enc(p: int, b: int) -> int:
    m = degree_int(p, b)
    n = b ** m - 1
    factors = prime_factors(n)
    for g in range(1, b ** m):
        if all(powmod_int(g, n // ell, p, b) != 1 for ell in factors):
            return g
    raise AssertionError("unreachable: the multiplicative group of a field is cyclic")


def find_primitive(p: GFPolynomial) -> GFPolynomial:
    """Generator of (Z_b[x]/p)^* with the smallest integer encoding."""
    if not is_irreducible(p):
        raise ValueError(f"{p!r} is not irreducible")
    return GFPolynomial.from_int(p.base, _find_primitive_enc(p.enc, p.base))
