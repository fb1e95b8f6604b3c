"""Special functions needed by the coverage formulas.

The Gaussian tail comes from :func:`scipy.special.erfc`. The incomplete
gamma functions are evaluated here because the interference exponent needs
them at negative order, which the library routines do not cover.
"""
from __future__ import annotations

import math

from scipy import special as sc

__all__ = [
    "q_function",
    "mills_ratio",
    "scaled_exp_q",
    "lower_incomplete_gamma",
    "upper_incomplete_gamma",
    "incomplete_gamma_gap",
]

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_EXP_LIMIT = 700.0  # exp() overflows just above 709
_EPS = 1e-17
_MAX_ITER = 10_000
_TINY = 1e-300


def q_function(x: float) -> float:
    """Standard Gaussian tail probability ``Q(x) = P[N(0,1) > x]``."""
    if math.isnan(x):
        raise ValueError("q_function argument is NaN")
    return 0.5 * float(sc.erfc(x / _SQRT2))


def _mills_asymptotic(x: float) -> float:
    # exp(x^2/2) Q(x) ~ 1/(x sqrt(2 pi)) * sum_n (-1)^n (2n-1)!! / x^(2n);
    # only used for x > 37, where the terms shrink by >1000x each step
    # until n ~ x^2/2.
    inv = 1.0 / (x * x)
    term = 1.0
    total = 1.0
    for n in range(1, 60):
        new = -term * (2 * n - 1) * inv
        if abs(new) >= abs(term):
            break
        term = new
        total += term
        if abs(term) < _EPS * abs(total):
            break
    return total / (x * _SQRT2PI)


def mills_ratio(x: float) -> float:
    """``exp(x^2 / 2) * Q(x)`` without overflow for large ``x``."""
    if 0.5 * x * x <= _EXP_LIMIT or x < 0:
        return math.exp(0.5 * x * x) * q_function(x)
    return _mills_asymptotic(x)


def scaled_exp_q(a: float, b: float) -> float:
    """Integral of ``exp(-a x - b x^2)`` over ``[0, inf)``.

    Equal to ``sqrt(pi/b) * exp(a^2/(4b)) * Q(a / sqrt(2b))``. The
    exponential factor is never formed on its own once ``a^2/(4b)``
    exceeds the double-precision range; the scaled tail takes over there.
    """
    if not (a >= 0):
        raise ValueError(f"a must be >= 0, got {a!r}")
    if not (b > 0):
        raise ValueError(f"b must be > 0, got {b!r}")
    x = a / math.sqrt(2.0 * b)
    return math.sqrt(math.pi / b) * mills_ratio(x)


def _gamma_series(s, x):
    # P(s, x) by its power series; good for x < s + 1
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma series did not converge (s={s}, x={x})")
    return total * math.exp(-x + s * math.log(x) - math.lgamma(s))


def _gamma_cf(s, x):
    # Q(s, x) by modified Lentz continued fraction; good for x >= s + 1
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise ArithmeticError(f"incomplete gamma fraction did not converge (s={s}, x={x})")
    return math.exp(-x + s * math.log(x) - math.lgamma(s)) * h


def _regularized_pq(s, x):
    """Return ``(P(s, x), Q(s, x))`` for ``s > 0``, ``x >= 0``."""
    if x == 0:
        return 0.0, 1.0
    if x < s + 1.0:
        p = _gamma_series(s, x)
        return p, 1.0 - p
    q = _gamma_cf(s, x)
    return 1.0 - q, q


def _check_order(s):
    if s <= 0 and float(s).is_integer():
        raise ValueError(f"order must not be a non-positive integer, got {s!r}")


def lower_incomplete_gamma(s: float, x: float) -> float:
    """``gamma(s, x) = int_0^x t^(s-1) e^-t dt``.

    For ``s <= 0`` this is the analytic continuation, obtained from
    ``gamma(s, x) = (gamma(s+1, x) + x^s e^-x) / s`` applied until the order
    is positive.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x!r}")
    _check_order(s)
    if s > 0:
        if x == 0:
            return 0.0
        return _regularized_pq(s, x)[0] * math.gamma(s)
    if x == 0:
        return -math.inf if s < 0 else 0.0
    return (lower_incomplete_gamma(s + 1.0, x) + x ** s * math.exp(-x)) / s


def upper_incomplete_gamma(s: float, x: float) -> float:
    """``Gamma(s, x) = int_x^inf t^(s-1) e^-t dt`` for any non-integer ``s <= 0`` and any ``s > 0``.

    Negative orders are lifted with ``Gamma(s, x) = (Gamma(s+1, x) - x^s e^-x) / s``.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x!r}")
    _check_order(s)
    if s > 0:
        if x == 0:
            return math.gamma(s)
        return _regularized_pq(s, x)[1] * math.gamma(s)
    if x == 0:
        return math.inf
    return (upper_incomplete_gamma(s + 1.0, x) - x ** s * math.exp(-x)) / s


def incomplete_gamma_gap(s: float, x: float) -> float:
    """``Gamma(s, x) - Gamma(s)``, i.e. ``-gamma(s, x)``.

    Going through the lower function keeps every term positive for
    ``-1 < s < 0``; subtracting the two large upper values directly
    cancels badly as ``x -> 0``.
    """
    return -lower_incomplete_gamma(s, x)
