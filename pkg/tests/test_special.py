import math

import mpmath
import numpy as np
import pytest

from cachenet.special import (
    incomplete_gamma_gap,
    lower_incomplete_gamma,
    mills_ratio,
    q_function,
    scaled_exp_q,
    upper_incomplete_gamma,
)

mpmath.mp.dps = 40


def _q_reference(x):
    return float(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)


def _gauss_tail_by_simpson(x, tol=1e-13):
    """Q(x) from composite Simpson on [x, x + 40], halving the step until stable."""
    f = lambda y: math.exp(-0.5 * y * y) / math.sqrt(2 * math.pi)
    a, b = x, x + 40.0
    n = 64
    prev = None
    while True:
        h = (b - a) / n
        s = f(a) + f(b) + 4 * sum(f(a + (2 * i + 1) * h) for i in range(n // 2)) \
            + 2 * sum(f(a + 2 * i * h) for i in range(1, n // 2))
        val = s * h / 3
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        n *= 2


def test_q_at_zero():
    assert q_function(0.0) == 0.5


def test_q_limits():
    assert q_function(math.inf) == 0.0
    assert q_function(-math.inf) == 1.0


def test_q_at_one_frozen_oracle():
    oracle = _gauss_tail_by_simpson(1.0)
    assert oracle == pytest.approx(0.158655253931, abs=1e-12)
    assert q_function(1.0) == pytest.approx(oracle, abs=1e-12)


def test_q_rejects_nan():
    with pytest.raises(ValueError):
        q_function(math.nan)


@pytest.mark.parametrize("x", np.linspace(-8, 8, 161))
def test_q_absolute_accuracy(x):
    assert abs(q_function(x) - _q_reference(x)) <= 1e-14


@pytest.mark.parametrize("x", [8.5, 10.0, 15.0, 25.0, 37.0, 38.5])
def test_q_relative_accuracy_in_tail(x):
    ref = _q_reference(x)
    assert abs(q_function(x) - ref) <= 1e-12 * ref


@pytest.mark.parametrize("x", np.linspace(0, 12, 97))
def test_q_symmetry(x):
    assert abs(q_function(x) + q_function(-x) - 1.0) <= 1e-14


def test_q_strictly_decreasing():
    xs = np.linspace(-8, 8, 401)
    vals = [q_function(x) for x in xs]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def _scaled_exp_q_reference(a, b):
    a, b = mpmath.mpf(a), mpmath.mpf(b)
    return float(mpmath.quad(lambda x: mpmath.exp(-a * x - b * x * x), [0, 1 / a if a > 1 else 1, mpmath.inf]))


def test_scaled_exp_q_gaussian_half_integral():
    assert scaled_exp_q(0.0, 1.0) == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)
    assert scaled_exp_q(0.0, 4.0) == pytest.approx(math.sqrt(math.pi / 4) / 2, rel=1e-15)
    assert scaled_exp_q(0.0, 4.0) == pytest.approx(0.4431135, abs=1e-7)


@pytest.mark.parametrize("a, b", [
    (1e4, 1.0), (0.5, 2.0), (3.0, 0.01), (50.0, 1.0), (52.0, 1.0), (100.0, 0.5), (1e3, 1e-3), (7.5, 0.02),
])
def test_scaled_exp_q_against_quadrature(a, b):
    ref = _scaled_exp_q_reference(a, b)
    assert scaled_exp_q(a, b) == pytest.approx(ref, rel=1e-10)


def test_scaled_exp_q_leading_order_for_large_a():
    v = scaled_exp_q(1e4, 1.0)
    assert math.isfinite(v)
    assert v == pytest.approx(1e-4, rel=1e-7)


@pytest.mark.parametrize("a, b", [(-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_scaled_exp_q_domain(a, b):
    with pytest.raises(ValueError):
        scaled_exp_q(a, b)


@pytest.mark.parametrize("x", [37.0, 37.5, 38.0, 40.0, 100.0, 1e4])
def test_mills_ratio_continuous_across_switch(x):
    ref = float(mpmath.exp(mpmath.mpf(x) ** 2 / 2) * mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)
    assert mills_ratio(x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("s", [-0.8, -2 / 3, -0.5, -0.4, -0.25, 0.2, 0.5, 1.5, 3.0])
@pytest.mark.parametrize("x", [1e-6, 0.01, 0.3, 1.0, 1.5, 4.0, 12.0, 40.0])
def test_upper_incomplete_gamma_against_mpmath(s, x):
    ref = float(mpmath.gammainc(s, x))
    assert upper_incomplete_gamma(s, x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("s", [-0.8, -0.5, -0.4, 0.5, 2.5])
@pytest.mark.parametrize("x", [1e-6, 0.3, 2.0, 30.0])
def test_lower_incomplete_gamma_against_mpmath(s, x):
    ref = float(mpmath.gammainc(s, 0, x)) if s > 0 else float(mpmath.gamma(s) - mpmath.gammainc(s, x))
    assert lower_incomplete_gamma(s, x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("s", [-0.8, -0.5, -0.4])
@pytest.mark.parametrize("x", [1e-10, 1e-4, 0.5, 5.0, 50.0])
def test_gap_against_mpmath(s, x):
    ref = float(mpmath.gammainc(s, x) - mpmath.gamma(s))
    assert incomplete_gamma_gap(s, x) == pytest.approx(ref, rel=1e-12)
    assert incomplete_gamma_gap(s, x) > 0


def test_negative_integer_order_rejected():
    with pytest.raises(ValueError):
        upper_incomplete_gamma(-1.0, 1.0)
    with pytest.raises(ValueError):
        lower_incomplete_gamma(0.0, 1.0)


def test_incomplete_gamma_edges():
    assert upper_incomplete_gamma(0.5, 0.0) == pytest.approx(math.sqrt(math.pi))
    assert upper_incomplete_gamma(-0.5, 0.0) == math.inf
    assert lower_incomplete_gamma(2.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        upper_incomplete_gamma(0.5, -1.0)
