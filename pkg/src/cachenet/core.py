"""Domain types and the popularity / backhaul models shared by every
computation path.

Units follow the usual convention for this model: storage ``S`` and file
length ``L`` in nats, rates (``T``, ``C``, delivery rate) in nats/sec/Hz.
Densities are per unit area and dimensionless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

__all__ = [
    "NetworkParams",
    "CacheParams",
    "BackhaulModel",
    "ExponentialFading",
    "DeterministicFading",
    "FadingModel",
    "BackhaulViolation",
    "BackhaulWarning",
    "backhaul_capacity",
    "cache_hit_probability",
    "validate_backhaul_constraint",
]


class BackhaulWarning(UserWarning):
    """Emitted when the backhaul rate is not below the file bitrate."""


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


@dataclass(frozen=True)
class NetworkParams:
    """Deployment and link parameters ``(lambda, alpha, SNR, T)``.

    ``mu`` is the inverse transmit power. It is fixed to 1 in normal use;
    the noise power is derived as ``1 / (mu * SNR)`` so that every result
    depends on ``mu`` only through the SNR.
    """

    lam: float
    alpha: float
    snr_db: float
    target_rate: float
    mu: float = 1.0

    def __post_init__(self):
        _require(_finite(self.lam) and self.lam > 0, f"density must be > 0, got {self.lam!r}")
        _require(_finite(self.alpha) and self.alpha > 2, f"pathloss exponent must be > 2, got {self.alpha!r}")
        _require(_finite(self.snr_db), f"snr_db must be finite, got {self.snr_db!r}")
        _require(_finite(self.target_rate) and self.target_rate > 0,
                 f"target rate must be > 0, got {self.target_rate!r}")
        _require(_finite(self.mu) and self.mu > 0, f"mu must be > 0, got {self.mu!r}")

    @property
    def snr(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def noise_power(self) -> float:
        return 1.0 / (self.mu * self.snr)

    @property
    def sinr_threshold(self) -> float:
        """``e^T - 1``: the SINR a link needs to carry rate ``T``."""
        return math.expm1(self.target_rate)


@dataclass(frozen=True)
class CacheParams:
    """Storage ``S``, file length ``L`` and popularity shape ``gamma``."""

    storage: float
    file_length: float
    gamma: float

    def __post_init__(self):
        _require(_finite(self.storage) and self.storage >= 0, f"storage must be >= 0, got {self.storage!r}")
        _require(_finite(self.file_length) and self.file_length > 0,
                 f"file length must be > 0, got {self.file_length!r}")
        _require(_finite(self.gamma) and self.gamma > 1, f"gamma must be > 1, got {self.gamma!r}")

    @property
    def capacity_files(self) -> float:
        """Number of (possibly fractional) files the cache holds."""
        return self.storage / self.file_length


@dataclass(frozen=True)
class BackhaulModel:
    """Per-station backhaul rate ``C(lambda) = c1 / lambda + c2``."""

    c1: float
    c2: float = 0.0

    def __post_init__(self):
        _require(_finite(self.c1) and self.c1 > 0, f"c1 must be > 0, got {self.c1!r}")
        _require(_finite(self.c2) and self.c2 >= 0, f"c2 must be >= 0, got {self.c2!r}")


@dataclass(frozen=True)
class ExponentialFading:
    """Rayleigh interferer fading, ``g ~ Exponential(mu)`` (unit mean at mu=1)."""


@dataclass(frozen=True)
class DeterministicFading:
    """Interferer gain fixed at ``value``."""

    value: float = 1.0

    def __post_init__(self):
        _require(_finite(self.value) and self.value > 0,
                 f"deterministic fading gain must be > 0, got {self.value!r}")


FadingModel = Union[ExponentialFading, DeterministicFading]


@dataclass(frozen=True)
class BackhaulViolation:
    capacity: float
    target_rate: float

    def __str__(self):
        return (f"backhaul capacity C(lambda)={self.capacity:.6g} is not below "
                f"the target rate T={self.target_rate:.6g}")


def backhaul_capacity(lam: float, model: BackhaulModel) -> float:
    """Backhaul rate available to one station at density `lam`."""
    _require(lam > 0, f"density must be > 0, got {lam!r}")
    return model.c1 / lam + model.c2


def cache_hit_probability(cache: CacheParams) -> float:
    """Probability that a request falls in the cached catalogue.

    Files are indexed continuously on ``[1, inf)`` with power-law density
    ``(gamma - 1) f^-gamma``; the cache holds ``[1, 1 + S/L]``, which gives
    ``1 - (L / (L + S))^(gamma - 1)``.
    """
    # -expm1(k*log1p(x)) keeps precision when S/L is tiny or huge
    return -math.expm1(-(cache.gamma - 1.0) * math.log1p(cache.capacity_files))


def validate_backhaul_constraint(net: NetworkParams, model: BackhaulModel) -> Optional[BackhaulViolation]:
    """Return a violation report when ``C(lambda) >= T``, else ``None``."""
    c = backhaul_capacity(net.lam, model)
    if c >= net.target_rate:
        return BackhaulViolation(capacity=c, target_rate=net.target_rate)
    return None
