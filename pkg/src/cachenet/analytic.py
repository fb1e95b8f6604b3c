"""Outage probability and average delivery rate of the typical user.

Two evaluation routes are provided:

* the general route integrates ``pi*lam * int_0^inf exp(-pi*lam*v*beta - mu*(e^T-1)*sigma^2*v^(alpha/2)) dv``
  numerically, with the interference coefficient ``beta`` built from
  incomplete gamma functions of negative order;
* the closed-form route applies when ``alpha == 4`` and interferers see
  Rayleigh fading, where the integral reduces to an ``exp * Q`` product.

Both give the SINR coverage probability; the cache-hit probability is an
independent factor.
"""
from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

from scipy import integrate

from .core import (
    BackhaulModel,
    BackhaulWarning,
    CacheParams,
    DeterministicFading,
    ExponentialFading,
    FadingModel,
    NetworkParams,
    backhaul_capacity,
    cache_hit_probability,
    validate_backhaul_constraint,
)
from .special import incomplete_gamma_gap, scaled_exp_q

__all__ = [
    "EvaluationPath",
    "QuadratureConfig",
    "AnalyticResult",
    "QuadratureError",
    "ProbabilityRangeError",
    "rho",
    "beta",
    "coverage_probability",
    "outage_probability",
    "avg_delivery_rate",
]

PROBABILITY_SLACK = 1e-9


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ProbabilityRangeError(ArithmeticError):
    """A computed probability left [0, 1] by more than roundoff."""


class EvaluationPath(str, enum.Enum):
    GENERAL = "general_quadrature"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be > 0")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be an integer >= 1")


DEFAULT_QUAD = QuadratureConfig()


@dataclass(frozen=True)
class AnalyticResult:
    value: float
    path: EvaluationPath
    estimated_error: float = 0.0


def _as_probability(x: float) -> float:
    if x < -PROBABILITY_SLACK or x > 1.0 + PROBABILITY_SLACK or math.isnan(x):
        raise ProbabilityRangeError(f"probability {x!r} outside [0, 1]")
    return min(max(x, 0.0), 1.0)


def _integrate_semi_infinite(f: Callable[[float], float], lower: float, quad: QuadratureConfig,
                             scale: float = 1.0):
    """Integrate `f` over ``[lower, inf)``.

    Maps ``v = lower + scale * t / (1 - t)`` onto ``t in [0, 1)`` and hands
    the result to QUADPACK's adaptive Gauss-Kronrod routine.
    """

    def g(t):
        if t >= 1.0:
            return 0.0
        w = 1.0 - t
        return f(lower + scale * t / w) * scale / (w * w)

    out = integrate.quad(g, 0.0, 1.0, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
                         limit=int(quad.max_subdivisions), full_output=1)
    value, err = out[0], out[1]
    if len(out) > 3:
        raise QuadratureError(f"quadrature did not converge: {out[3].splitlines()[0]}")
    return value, err


def rho(target_rate: float, alpha: float, quad: Optional[QuadratureConfig] = None) -> float:
    """Normalized interference integral for Rayleigh-faded interferers.

    ``rho(T, alpha) = (e^T-1)^(2/alpha) * int_{(e^T-1)^(-2/alpha)}^inf du / (1 + u^(alpha/2))``.
    Closed form at ``alpha = 4``; quadrature otherwise.
    """
    if not alpha > 2:
        raise ValueError(f"pathloss exponent must be > 2, got {alpha!r}")
    if not target_rate >= 0:
        raise ValueError(f"target rate must be >= 0, got {target_rate!r}")
    th = math.expm1(target_rate)
    if th == 0.0:
        return 0.0
    if alpha == 4:
        # pi/2 - atan(1/y) == atan(y) for y > 0; the latter avoids cancellation
        y = math.sqrt(th)
        return y * math.atan(y)
    quad = quad or DEFAULT_QUAD
    delta = 2.0 / alpha
    half = alpha / 2.0
    lower = th ** -delta
    val, _ = _integrate_semi_infinite(lambda u: 1.0 / (1.0 + u ** half), lower, quad,
                                      scale=max(lower, 1.0))
    return th ** delta * val


@functools.lru_cache(maxsize=4096)
def _beta_cached(target_rate, alpha, fading, mu, quad):
    delta = 2.0 / alpha
    s = mu * math.expm1(target_rate)
    if isinstance(fading, DeterministicFading):
        g = fading.value
        expectation = g ** delta * incomplete_gamma_gap(-delta, s * g)
    elif isinstance(fading, ExponentialFading):
        # g ~ Exponential(mu): density mu * exp(-mu g)
        def integrand(g):
            return g ** delta * incomplete_gamma_gap(-delta, s * g) * mu * math.exp(-mu * g)

        expectation, _ = _integrate_semi_infinite(integrand, 0.0, quad, scale=1.0 / mu)
    else:
        raise TypeError(f"unsupported fading model {fading!r}")
    return (2.0 / alpha) * s ** delta * expectation


def beta(target_rate: float, alpha: float, fading: Optional[FadingModel] = None, mu: float = 1.0,
         quad: Optional[QuadratureConfig] = None) -> float:
    """Interference coefficient of the coverage integrand.

    ``(2/alpha) (mu (e^T-1))^(2/alpha) E_g[g^(2/alpha) (Gamma(-2/alpha, mu (e^T-1) g) - Gamma(-2/alpha))]``.

    The value already accounts for the nearest-station distance density, so
    for Rayleigh-faded interferers it equals ``1 + rho(T, alpha)``.
    """
    if not alpha > 2:
        raise ValueError(f"pathloss exponent must be > 2, got {alpha!r}")
    if not target_rate > 0:
        raise ValueError(f"target rate must be > 0, got {target_rate!r}")
    if not mu > 0:
        raise ValueError(f"mu must be > 0, got {mu!r}")
    return _beta_cached(float(target_rate), float(alpha), fading or ExponentialFading(), float(mu),
                        quad or DEFAULT_QUAD)


def _closed_form_eligible(net: NetworkParams, fading: FadingModel) -> bool:
    return net.alpha == 4 and isinstance(fading, ExponentialFading)


def coverage_probability(net: NetworkParams, quad: Optional[QuadratureConfig] = None,
                         fading: Optional[FadingModel] = None,
                         path: Optional[EvaluationPath] = None) -> AnalyticResult:
    """P[ln(1 + SINR) > T] for the typical user.

    `path` forces an evaluation route; by default the closed form is used
    whenever it applies.
    """
    quad = quad or DEFAULT_QUAD
    fading = fading or ExponentialFading()
    if path is None:
        path = EvaluationPath.CLOSED_FORM if _closed_form_eligible(net, fading) else EvaluationPath.GENERAL
    path = EvaluationPath(path)

    lam = net.lam
    noise_coef = net.mu * net.sinr_threshold * net.noise_power  # == (e^T - 1) / SNR

    if path is EvaluationPath.CLOSED_FORM:
        if not _closed_form_eligible(net, fading):
            raise ValueError("closed form requires alpha == 4 and exponential interferer fading")
        a = math.pi * lam * (1.0 + rho(net.target_rate, 4.0))
        value = math.pi * lam * scaled_exp_q(a, noise_coef)
        return AnalyticResult(_as_probability(value), path, 0.0)

    b = beta(net.target_rate, net.alpha, fading, net.mu, quad)
    lin = math.pi * lam * b
    half = net.alpha / 2.0

    def integrand(v):
        return math.exp(-lin * v - noise_coef * v ** half)

    # characteristic width of the integrand, so t ~ 1/2 sits where it decays
    width = 1.0 / (lin + noise_coef ** (1.0 / half))
    val, err = _integrate_semi_infinite(integrand, 0.0, quad, scale=width)
    return AnalyticResult(_as_probability(math.pi * lam * val), path, math.pi * lam * err)


def outage_probability(net: NetworkParams, cache: CacheParams, quad: Optional[QuadratureConfig] = None,
                       fading: Optional[FadingModel] = None,
                       path: Optional[EvaluationPath] = None) -> AnalyticResult:
    """``1 - coverage * hit``: the request is neither decodable at rate T
    nor served from the local cache."""
    cov = coverage_probability(net, quad, fading, path)
    hit = cache_hit_probability(cache)
    return AnalyticResult(_as_probability(1.0 - cov.value * hit), cov.path, cov.estimated_error * hit)


def avg_delivery_rate(net: NetworkParams, cache: CacheParams, backhaul: BackhaulModel,
                      quad: Optional[QuadratureConfig] = None, fading: Optional[FadingModel] = None,
                      path: Optional[EvaluationPath] = None) -> AnalyticResult:
    """Mean delivery rate: ``coverage * (C + (T - C) * hit)``.

    Warns with :class:`BackhaulWarning` when ``C(lambda) >= T``; the value is
    still returned.
    """
    violation = validate_backhaul_constraint(net, backhaul)
    if violation is not None:
        warnings.warn(str(violation), BackhaulWarning, stacklevel=2)
    cov = coverage_probability(net, quad, fading, path)
    hit = cache_hit_probability(cache)
    c = backhaul_capacity(net.lam, backhaul)
    rate_given_cov = c + (net.target_rate - c) * hit
    return AnalyticResult(cov.value * rate_given_cov, cov.path, cov.estimated_error * abs(rate_given_cov))
