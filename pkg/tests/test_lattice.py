import random
from fractions import Fraction

import numpy as np
import pytest

from qmc_ipl import gfpoly
from qmc_ipl.digitnet import DigitVector, interlace_blocks, interlace_int_blocks, walsh_mean
from qmc_ipl.errors import InvalidRuleError
from qmc_ipl.gfpoly import GFPolynomial
from qmc_ipl.lattice import (
    PointSet,
    RuleSpec,
    coordinate_ints,
    digits_to_float,
    format_point_file,
    generate_point_set,
    in_dual,
    lattice_digits,
    lattice_point,
    laurent_digits,
    read_point_file,
    write_point_file,
)


def P(b, enc):
    return GFPolynomial.from_int(b, enc)


def laurent_oracle(a, p, b, m):
    """Digits of (a mod p)/p via the exact series identity a = p * sum t_l x^-l."""
    # Multiply by x^m: x^m a = p * T + R with deg R < m gives T = sum t_l x^(m-l)
    num = GFPolynomial.from_int(b, a) % GFPolynomial.from_int(b, p)
    shifted = num * GFPolynomial.from_int(b, b ** m)
    T, _ = divmod(shifted, GFPolynomial.from_int(b, p))
    coeffs = list(T.coeffs) + [0] * (m + 1)
    return [coeffs[m - l] for l in range(1, m + 1)]


@pytest.mark.parametrize("b,m", [(2, 5), (3, 3), (5, 2)])
def test_laurent_digits_match_division_oracle(b, m):
    p = gfpoly.smallest_irreducible(b, m).enc
    for a in range(b ** m):
        assert laurent_digits(a, p, b, m) == laurent_oracle(a, p, b, m)


def test_lattice_point_examples():
    p = P(2, 7)  # x^2 + x + 1
    q = [P(2, 1)]
    assert lattice_point(p, q, 0)[0].digits == (0, 0)
    assert float(lattice_point(p, q, 1)[0]) == 0.25
    with pytest.raises(ValueError):
        lattice_point(p, q, 4)


def test_single_coordinate_is_injective():
    for m in range(1, 7):
        p = gfpoly.smallest_irreducible(2, m)
        pts = {lattice_point(p, [P(2, 1)], n)[0] for n in range(2 ** m)}
        assert len(pts) == 2 ** m


@pytest.mark.parametrize("b,m", [(2, 6), (3, 3)])
def test_coordinate_ints_match_reference(b, m):
    p = gfpoly.smallest_irreducible(b, m)
    for q in (1, 2, b ** m - 1):
        X = coordinate_ints(p.enc, q, b, m)
        for n in range(b ** m):
            assert X[n] == lattice_point(p, [P(b, q)], n)[0].to_int()


def test_generate_point_set_small_example():
    p = P(2, 7)
    spec = RuleSpec(2, 2, 1, 2, p, (P(2, 1), P(2, 1)))
    pts = generate_point_set(spec)
    for n in range(4):
        x = lattice_point(p, spec.q, n)
        assert pts.digit_vector(n, 0) == interlace_blocks(2, 1, x)[0]
    assert np.all(pts.to_float()[0] == 0)
    # coordinate digits (t1, t2) = (0,1), (1,1), (1,0) for n = 1, 2, 3 -> interlaced pairs
    assert sorted(pts.to_float()[:, 0].tolist()) == [0.0, 0.1875, 0.75, 0.9375]


def test_d1_is_plain_lattice():
    p = gfpoly.smallest_irreducible(2, 4)
    q = (P(2, 1), P(2, 5))
    spec = RuleSpec(2, 4, 2, 1, p, q)
    assert np.array_equal(generate_point_set(spec).digits, lattice_digits(p, q))


def test_rulespec_invariants():
    p = gfpoly.smallest_irreducible(2, 3)
    one = P(2, 1)
    with pytest.raises(InvalidRuleError):
        RuleSpec(2, 3, 1, 0, p, ())
    with pytest.raises(InvalidRuleError):
        RuleSpec(2, 3, 1, 1, P(2, 9), (one,))  # x^3 + 1 is reducible
    with pytest.raises(InvalidRuleError):
        RuleSpec(2, 3, 1, 1, p, (P(2, 8),))  # degree 3 generator
    with pytest.raises(InvalidRuleError):
        RuleSpec(2, 3, 1, 1, p, (P(2, 0),))
    with pytest.raises(InvalidRuleError):
        RuleSpec(2, 3, 2, 1, p, (one,))


def test_in_dual_examples():
    p = gfpoly.smallest_irreducible(2, 4)
    q = (P(2, 1), P(2, 3))
    assert in_dual(p, q, [0, 0])
    assert in_dual(p, (P(2, 1),), [2 ** 4])
    assert not in_dual(p, (P(2, 1),), [1])
    with pytest.raises(ValueError):
        in_dual(p, q, [1])


def _random_irreducible(rng, b, m):
    while True:
        enc = rng.randrange(b ** m, b ** (m + 1))
        p = P(b, enc)
        if gfpoly.is_irreducible(p):
            return p


@pytest.mark.parametrize("b", [2, 3])
def test_character_sum_is_dual_indicator(b):
    rng = random.Random(b)
    hits = 0
    for _ in range(100):
        m = rng.randint(1, 6 if b == 2 else 4)
        ds = rng.randint(1, 4)
        p = _random_irreducible(rng, b, m)
        q = [P(b, rng.randrange(1, b ** m)) for _ in range(ds)]
        digits = lattice_digits(p, q)
        if rng.random() < 0.5:
            # force a dual vector: k_1 = -(k_2 q_2 + ...) / q_1 mod p
            rest = [rng.randrange(b ** m) for _ in range(ds - 1)]
            acc = GFPolynomial(b)
            for kj, qj in zip(rest, q[1:]):
                acc = acc + P(b, kj) * qj
            inv = gfpoly.powmod(q[0] % p, b ** m - 2, p)
            k = [(-(acc * inv) % p).enc] + rest
        else:
            k = [rng.randrange(b ** (m + 1)) for _ in range(ds)]
        w = walsh_mean(b, k, digits)
        expect = 1.0 if in_dual(p, q, k) else 0.0
        hits += expect == 1.0
        assert abs(w - expect) <= 1e-9
    assert hits >= 20


@pytest.mark.parametrize("b", [2, 3])
def test_interlaced_character_sum(b):
    rng = random.Random(20 + b)
    for _ in range(60):
        m = rng.randint(1, 4)
        d = rng.randint(1, 2)
        s = rng.randint(1, 2)
        p = _random_irreducible(rng, b, m)
        q = tuple(P(b, rng.randrange(1, b ** m)) for _ in range(d * s))
        spec = RuleSpec(b, m, s, d, p, q)
        pts = generate_point_set(spec)
        k = [rng.randrange(b ** m) for _ in range(d * s)]
        if rng.random() < 0.5:
            acc = GFPolynomial(b)
            for kj, qj in zip(k[1:], q[1:]):
                acc = acc + P(b, kj) * qj
            inv = gfpoly.powmod(q[0] % p, b ** m - 2, p)
            k[0] = (-(acc * inv) % p).enc
        w = walsh_mean(b, interlace_int_blocks(d, s, k, b), pts.digits)
        assert abs(w - (1.0 if in_dual(p, q, k) else 0.0)) <= 1e-9


def test_float_roundtrip_and_file(tmp_path):
    p = gfpoly.smallest_irreducible(2, 6)
    spec = RuleSpec(2, 6, 2, 3, p, tuple(P(2, e) for e in (1, 5, 9, 17, 33, 40)))
    pts = generate_point_set(spec)
    x = pts.to_float()
    for n in range(0, 64, 7):
        for j in range(2):
            assert DigitVector.from_value(2, x[n, j], 18) == pts.digit_vector(n, j)
    path = tmp_path / "pts.txt"
    write_point_file(pts, path)
    header, y = read_point_file(path)
    assert header == {"b": 2, "m": 6, "s": 2, "d": 3, "N": 64}
    assert np.array_equal(x, y)
    assert path.read_text().splitlines()[0] == "# 2 6 2 3 64"


def test_extended_precision_truncates():
    digits = np.ones((1, 1, 60), dtype=np.uint8)
    pts = PointSet(2, 20, 1, 3, digits)
    with pytest.raises(InvalidRuleError):
        pts.to_float()
    x = pts.to_float(allow_extended=True)[0, 0]
    assert x < 1.0
    assert Fraction(x) <= Fraction(2 ** 60 - 1, 2 ** 60)
    assert x == digits_to_float(digits, 2)[0, 0]


def test_prefix_matches_leading_generators():
    p = gfpoly.smallest_irreducible(2, 4)
    q = tuple(P(2, e) for e in (1, 3, 5, 7, 9, 11))
    spec = RuleSpec(2, 4, 3, 2, p, q)
    sub = spec.prefix(2)
    assert sub.q == q[:4]
    full = generate_point_set(spec).digits
    assert np.array_equal(generate_point_set(sub).digits, full[:, :2])


def test_point_file_format_text():
    p = gfpoly.smallest_irreducible(2, 3)
    spec = RuleSpec(2, 3, 1, 1, p, (P(2, 1),))
    text = format_point_file(generate_point_set(spec))
    lines = text.splitlines()
    assert lines[0] == "# 2 3 1 1 8" and len(lines) == 9
    assert float(lines[1]) == 0.0
