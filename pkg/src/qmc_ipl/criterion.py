"""Quality criterion B_u, truncation constant C_u, worst-case-error bound,
and the concave map phi used in the construction's error analysis.

All per-point products of psi factors are accumulated as sums of
``log1p`` terms and turned back into excesses with ``expm1``; B_u is then
the compensated mean of those excesses.  Working with the excess rho - 1
rather than rho avoids cancelling against the leading 1, which matters
once B_u falls to ~1e-14.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import gfpoly
from .digitnet import DigitVector
from .errors import SizeGuardError
from .lattice import RuleSpec, coordinate_ints, iter_slots

__all__ = [
    "WeightProfile",
    "CriterionValue",
    "m_b",
    "M_b",
    "C_b",
    "eta",
    "psi",
    "psi_log_table",
    "log_psi_from_ints",
    "mean_excess",
    "B_u",
    "C_u",
    "wce_bound",
    "phi",
    "phi_inverse",
    "phi_of_power",
    "phi_knot",
    "theorem2_bound",
    "prefix_bound",
]


def m_b(b: int) -> float:
    return 2.0 * math.sin(math.pi / b)


def M_b(b: int) -> float:
    if b % 2 == 0:
        return 2.0
    return 2.0 * math.sin((b + 1) * math.pi / (2 * b))


def C_b(b: int) -> float:
    if b == 2:
        return 2.0
    Mb = M_b(b)
    return Mb + b * m_b(b) / (b - Mb)


@dataclass(frozen=True)
class WeightProfile:
    """Weights u_1 >= u_2 >= ... > 0 and their exponents a_j.

    Exactly one of ``r`` (the preset u_j = 2**-(j**r)), ``u`` (explicit
    weights) or ``a`` (explicit exponents) must be given.  Explicit lists
    fix the largest usable dimension.
    """

    b: int = 2
    r: float | None = None
    u: tuple[float, ...] | None = None
    a: tuple[float, ...] | None = None

    def __post_init__(self):
        given = [x is not None for x in (self.r, self.u, self.a)]
        if sum(given) != 1:
            raise ValueError("give exactly one of r, u or a")
        if not gfpoly.is_prime(self.b):
            raise ValueError(f"base must be prime, got {self.b}")
        if self.r is not None and not self.r > 0:
            raise ValueError(f"decay exponent r must be positive, got {self.r}")
        if self.u is not None:
            u = tuple(float(x) for x in self.u)
            if any(x <= 0 for x in u) or any(x < y for x, y in zip(u, u[1:])):
                raise ValueError("weights must be positive and non-increasing")
            object.__setattr__(self, "u", u)
        if self.a is not None:
            object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        # psi factors 1 + eta / b^(d(i-1)+h+a) stay positive only for a > -1
        if self.a is not None and any(x <= -1 for x in self.a):
            raise ValueError("exponents a_j must exceed -1")

    @property
    def capacity(self) -> int | None:
        seq = self.u if self.u is not None else self.a
        return None if seq is None else len(seq)

    def exponents(self, s: int) -> list[float]:
        """a_1..a_s with a_j = -log_b(C_b u_j / m_b)."""
        cap = self.capacity
        if cap is not None and s > cap:
            raise ValueError(f"weight profile defines only {cap} coordinates")
        if self.a is not None:
            return list(self.a[:s])
        b = self.b
        shift = math.log(C_b(b) / m_b(b), b)
        if self.r is not None and b == 2:
            out = [float(j ** self.r) for j in range(1, s + 1)]  # C_2 = m_2, exact
        elif self.r is not None:
            out = [j ** self.r * math.log(2, b) - shift for j in range(1, s + 1)]
        else:
            out = [-math.log(uj, b) - shift for uj in self.u[:s]]
        if any(x <= -1 for x in out):
            raise ValueError("weights too large: some exponent a_j <= -1")
        return out

    def to_json(self) -> dict:
        if self.r is not None:
            return {"b": self.b, "r": self.r}
        if self.u is not None:
            return {"b": self.b, "u": list(self.u)}
        return {"b": self.b, "a": list(self.a)}

    @classmethod
    def from_json(cls, obj: dict) -> WeightProfile:
        b = int(obj.get("b", 2))
        if "r" in obj:
            return cls(b, r=float(obj["r"]))
        if "u" in obj:
            return cls(b, u=tuple(obj["u"]))
        return cls(b, a=tuple(obj["a"]))


def eta(xi: int, b: int) -> int:
    return b - 1 if xi == 0 else -1


def psi(a: float, h: int, m: int, d: int, x: DigitVector, b: int) -> float:
    """prod_{i=1}^{m} (1 + eta(xi_i) / b^(d(i-1)+h+a))."""
    if not 1 <= h <= d:
        raise ValueError(f"h must satisfy 1 <= h <= d, got h={h}, d={d}")
    x = x.padded(m)
    out = 1.0
    for i in range(1, m + 1):
        out *= 1.0 + eta(x.digits[i - 1], b) / b ** (d * (i - 1) + h + a)
    return out


def psi_log_table(a: float, h: int, d: int, m: int, b: int) -> np.ndarray:
    """log1p of each psi factor, shape (m, b): row i-1, column digit value."""
    table = np.empty((m, b))
    for i in range(1, m + 1):
        w = float(b) ** -(d * (i - 1) + h + a)
        table[i - 1, 0] = math.log1p((b - 1) * w)
        table[i - 1, 1:] = math.log1p(-w)
    return table


_CHUNK_ENTRIES = 256  # size of each per-chunk lookup table


@lru_cache(maxsize=64)
def _chunk_digits(b: int, width: int) -> np.ndarray:
    """Digits (most significant first) of every value below b^width."""
    v = np.arange(b ** width)
    return np.stack([(v // b ** (width - 1 - i)) % b for i in range(width)], axis=1)


def log_psi_from_ints(X: np.ndarray, table: np.ndarray, b: int) -> np.ndarray:
    """log psi at every coordinate in X, where X holds b^m * value.

    Digits are processed in fixed chunks: the logs of each chunk's digit
    factors are summed into a small lookup table, and the chunk values are
    then added in digit order.  Every caller goes through this function, so
    the fixed grouping reproduces values bit for bit across code paths.
    """
    m = table.shape[0]
    width = max(1, int(math.log(_CHUNK_ENTRIES, b) + 1e-9))
    acc = np.zeros(X.shape)
    for start in range(0, m, width):
        w = min(width, m - start)
        digits = _chunk_digits(b, w)
        chunk_table = table[np.arange(start, start + w), digits].sum(axis=1)
        shift = m - start - w
        if b == 2:
            key = (X >> shift) & ((1 << w) - 1)
        else:
            key = (X // b ** shift) % b ** w
        acc += chunk_table[key]
    return acc


def mean_excess(log_rho: np.ndarray) -> float:
    """mean(rho) - 1 with rho = exp(log_rho), summed with math.fsum."""
    return math.fsum(np.expm1(log_rho).tolist()) / log_rho.shape[0]


def _slot_tables(spec: RuleSpec, weights: WeightProfile, tau: int) -> list[np.ndarray]:
    a = weights.exponents(spec.s)
    out = []
    for t, (j, h) in enumerate(iter_slots(spec.d, spec.s)):
        if t >= tau:
            break
        out.append(psi_log_table(a[j - 1], h, spec.d, spec.m, spec.b))
    return out


def B_u(spec: RuleSpec, tau: int | None = None, weights: WeightProfile | None = None) -> float:
    """The criterion for the first ``tau`` generators (default all d*s).

    Equals the sum of b^-mu_tilde(a; k) over nonzero dual vectors k with
    every k_j < b^m.
    """
    weights = weights or spec.weights
    if weights is None:
        raise ValueError("a weight profile is required")
    ds = spec.d * spec.s
    tau = ds if tau is None else tau
    if not 1 <= tau <= ds:
        raise ValueError(f"tau must be in [1, {ds}], got {tau}")
    b, m = spec.b, spec.m
    if tau == 1:
        # the only dual vector of one nonzero generator below b^m is 0
        return 0.0
    log_rho = np.zeros(b ** m)
    for t, table in enumerate(_slot_tables(spec, weights, tau)):
        X = coordinate_ints(spec.p.enc, spec.q[t].enc, b, m)
        log_rho += log_psi_from_ints(X, table, b)
    return mean_excess(log_rho)


def C_u(b: int, m: int, d: int, a: Sequence[float]) -> tuple[float, float]:
    """Return ``(C_u, C_u - 1)``.

    The infinite product over digit positions i > m is summed in log form
    until the geometric tail bound falls below 1e-18 of the running total.
    """
    terms = []
    for aj in a:
        i = m + 1
        while True:
            for h in range(1, d + 1):
                terms.append(math.log1p((b - 1) * float(b) ** -(d * (i - 1) + h + aj)))
            tail = (b - 1) * float(b) ** -(d * i + 1 + aj) / (1 - float(b) ** -d)
            if tail < 1e-18 * math.fsum(terms) or tail == 0.0:
                break
            i += 1
    log_c = math.fsum(terms)
    return math.exp(log_c), math.expm1(log_c)


@dataclass(frozen=True)
class CriterionValue:
    B_u: float
    C_u: float
    C_u_minus_1: float

    @property
    def wce_bound(self) -> float:
        """C_u - 1 + C_u * B_u, an upper bound on the worst-case error."""
        return self.C_u_minus_1 + self.C_u * self.B_u


def wce_bound(spec: RuleSpec, weights: WeightProfile | None = None,
              B: float | None = None) -> CriterionValue:
    weights = weights or spec.weights
    if weights is None:
        raise ValueError("a weight profile is required")
    if B is None:
        B = B_u(spec, weights=weights)
    c, c1 = C_u(spec.b, spec.m, spec.d, weights.exponents(spec.s))
    return CriterionValue(B, c, c1)


# ---------------------------------------------------------------------------
# the concave map phi

def _check_lambda(lam: float) -> None:
    if not 0 < lam <= 1:
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")


def phi_knot(lam: float, b: int) -> tuple[float, float, float]:
    """(x_knot, phi(x_knot), slope) where phi switches to its linear branch."""
    _check_lambda(lam)
    if b == 2:
        y = math.log2(math.e) ** (1.0 / lam)  # log2(1 / x_knot)
        x = 2.0 ** -y
        return x, 1.0 / math.e, lam * y ** (lam - 1.0) / (math.e * x)
    return 1.0 / b, 1.0 / b, lam


def phi(x, lam: float, b: int):
    """b^-(log_b(1/x))^lam below the knot, its tangent line above, phi(0)=0.

    Concave, increasing and unbounded on [0, inf) for 0 < lam <= 1, and
    phi(b^-t) = b^-(t^lam) whenever b^-t lies below the knot.
    """
    xk, yk, slope = phi_knot(lam, b)
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -np.log(x) / math.log(b)
        power = np.power(float(b), -np.power(t, lam))
    out = np.where(x >= xk, slope * (x - xk) + yk, power)
    out = np.where(x == 0, 0.0, out)
    if np.any(x < 0):
        raise ValueError("phi is defined on [0, inf)")
    return out[()] if out.ndim == 0 else out


def phi_inverse(y, lam: float, b: int):
    xk, yk, slope = phi_knot(lam, b)
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < 0):
        raise ValueError("phi_inverse is defined on [0, inf)")
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -np.log(y) / math.log(b)
        power = np.power(float(b), -np.power(t, 1.0 / lam))
    out = np.where(y >= yk, xk + (y - yk) / slope, power)
    out = np.where(y == 0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def phi_of_power(t, lam: float, b: int):
    """phi(b^-t) evaluated without forming b^-t on the power branch."""
    xk, yk, slope = phi_knot(lam, b)
    t = np.asarray(t, dtype=np.float64)
    tk = -math.log(xk, b)
    out = np.where(t > tk, np.power(float(b), -np.power(np.maximum(t, 0.0), lam)),
                   slope * (np.power(float(b), -t) - xk) + yk)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# the CBC error bound

def _subset_histogram(M: int, b: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Over integers k in [0, b^M): count of k by (number of nonzero digits,
    sum of their 1-based positions).  Returned flattened as
    (sizes, position_sums, counts) for the nonzero cells."""
    smax = M * (M + 1) // 2
    table = np.zeros((M + 1, smax + 1))
    table[0, 0] = 1.0
    for c in range(1, M + 1):
        # choosing digit position c adds c to the sum and b-1 choices of value
        table[1:, c:] = table[1:, c:] + (b - 1) * table[:-1, :smax + 1 - c]
    sizes, sums = np.nonzero(table)
    return sizes, sums, table[sizes, sums]


def _combine(dists, max_terms: int) -> tuple[np.ndarray, np.ndarray]:
    vals, counts = np.zeros(1), np.ones(1)
    for v, c in dists:
        if vals.size * v.size > max_terms:
            raise SizeGuardError(
                f"bound enumeration needs {vals.size * v.size} terms (limit {max_terms})")
        vals = (vals[:, None] + v[None, :]).ravel()
        counts = (counts[:, None] * c[None, :]).ravel()
        vals, inv = np.unique(vals, return_inverse=True)
        counts = np.bincount(inv.ravel(), weights=counts)
    return vals, counts


def _phi_bound(dists, n_points: int, lam: float, b: int, max_terms: int) -> float:
    vals, counts = _combine(dists, max_terms)
    nz = vals != 0.0  # only k = 0 has metric 0 when every a_j > -1
    total = math.fsum(counts[nz] * phi_of_power(vals[nz], lam, b))
    return float(phi_inverse(total / (n_points - 1), lam, b))


def theorem2_bound(weights: WeightProfile, b: int, m: int, d: int, s: int, lam: float,
                   max_terms: int = 20_000_000) -> float:
    """phi^-1[ (b^m-1)^-1 sum_{k != 0, k_j < b^(dm)} phi(b^-mu(a; k)) ].

    The sum is evaluated exactly by grouping k per coordinate by the size and
    position-sum of its nonzero digit set, so mu is a function of the group.
    Raises :class:`SizeGuardError` when the grouped cross product exceeds
    ``max_terms``.
    """
    _check_lambda(lam)
    a = weights.exponents(s)
    dists = []
    for aj in a:
        sizes, sums, counts = _subset_histogram(d * m, b)
        dists.append((sums + sizes * aj, counts))
    return _phi_bound(dists, b ** m, lam, b, max_terms)


def prefix_bound(weights: WeightProfile, b: int, m: int, d: int, s: int, tau: int, lam: float,
                 max_terms: int = 20_000_000) -> float:
    """The same bound for the first ``tau`` generators, written over slot
    vectors k in [0, b^m)^tau with the interlaced metric mu_tilde."""
    _check_lambda(lam)
    a = weights.exponents(s)
    dists = []
    for t, (j, h) in enumerate(iter_slots(d, s)):
        if t >= tau:
            break
        sizes, sums, counts = _subset_histogram(m, b)
        # sum over chosen c of d(c-1)+h+a = d * sum(c) + size * (h + a - d)
        dists.append((d * sums + sizes * (h + a[j - 1] - d), counts))
    return _phi_bound(dists, b ** m, lam, b, max_terms)
