import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmc_ipl.convolver import CirculantPlan, circulant_multiply


def direct(col, v):
    n = len(col)
    return np.array([sum(col[(i - k) % n] * v[k] for k in range(n)) for i in range(n)])


def tol(col, v):
    return 1e-10 * len(col) * np.abs(col).max() * np.abs(v).max()


def test_identity_column():
    v = np.arange(1.0, 101.0)
    e0 = np.zeros(100)
    e0[0] = 1
    assert np.allclose(circulant_multiply(e0, v), v, atol=1e-12)


def test_all_ones_column():
    v = np.random.default_rng(0).normal(size=127)
    out = circulant_multiply(np.ones(127), v)
    assert np.allclose(out, v.sum(), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 7, 15, 31, 63, 64, 255, 1023])
def test_matches_direct_product(n):
    rng = np.random.default_rng(n)
    col, v = rng.normal(size=(2, n))
    assert np.max(np.abs(circulant_multiply(col, v) - direct(col, v))) <= tol(col, v)


def test_length_mismatch():
    with pytest.raises(ValueError):
        circulant_multiply(np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        CirculantPlan.for_length(5).multiply(np.ones(4), np.ones(4))
    with pytest.raises(ValueError):
        CirculantPlan.for_length(0)


def test_plan_reuse_and_strategy():
    assert CirculantPlan.for_length(63).direct
    plan = CirculantPlan.for_length(1023)
    assert not plan.direct and plan.fft_len >= 2 * 1023 - 1
    assert plan.fft_len & (plan.fft_len - 1) == 0
    assert CirculantPlan.for_length(1023) is plan


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 1023), st.integers(0, 2 ** 31), st.floats(-3, 3), st.integers(0, 5000))
def test_linearity_and_shift_equivariance(n, seed, alpha, shift):
    rng = np.random.default_rng(seed)
    col, v, w = rng.normal(size=(3, n))
    lhs = circulant_multiply(col, alpha * v + w)
    rhs = alpha * circulant_multiply(col, v) + circulant_multiply(col, w)
    assert np.max(np.abs(lhs - rhs)) <= 4 * tol(col, np.abs(v) + np.abs(w)) * max(1, abs(alpha))
    k = shift % n
    shifted = circulant_multiply(col, np.roll(v, k))
    assert np.max(np.abs(shifted - np.roll(circulant_multiply(col, v), k))) <= 2 * tol(col, v)


def test_runtime_scaling():
    times = {}
    for m in (10, 11, 12, 13, 14):
        n = 2 ** m - 1
        plan = CirculantPlan.for_length(n)
        col, v = np.random.default_rng(m).normal(size=(2, n))
        samples = []
        for _ in range(15):
            t0 = time.perf_counter()
            plan.multiply(col, v)
            samples.append(time.perf_counter() - t0)
        times[m] = min(samples)
    ratios = [times[m + 1] / times[m] for m in range(10, 14)]
    assert max(ratios) < 2.5, ratios
