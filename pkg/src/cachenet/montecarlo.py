"""Monte Carlo estimation of outage probability and delivery rate.

Each realization drops a Poisson field of stations on a disk around the
typical user, attaches the user to the nearest one, draws Rayleigh fading
for the serving link and every interferer, and draws a file request from
the power-law popularity law.

Realization ``i`` draws from its own Philox streams, keyed by the master
seed with ``i`` in the high word of the counter, so results do not depend
on how realizations are spread over worker processes. Geometry, fading and
the file request use separate streams, and stations are generated outward
from the user, so enlarging the window keeps every nearby station and its
fading and only adds more distant interferers.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .core import (
    BackhaulModel,
    BackhaulWarning,
    CacheParams,
    NetworkParams,
    backhaul_capacity,
    validate_backhaul_constraint,
)

__all__ = [
    "SimConfig",
    "RealizationOutcome",
    "RealizationBatch",
    "EstimateResult",
    "RealizationStreams",
    "realization_rng",
    "sample_ppp",
    "realize",
    "run_realizations",
    "estimate",
]

_U64 = 1 << 64


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings.

    The window is a disk of radius ``window_radius_factor / sqrt(lam)``,
    holding ``pi * k^2`` stations on average (about 1257 for the default
    ``k = 20``).
    """

    realizations: int = 1000
    seed: int = 0
    window_radius_factor: float = 20.0
    min_points_guard: bool = True
    workers: int = 1

    def __post_init__(self):
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise ValueError(f"realizations must be an integer >= 1, got {self.realizations!r}")
        if not (0 <= int(self.seed) < _U64) or int(self.seed) != self.seed:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.window_radius_factor >= 5:
            raise ValueError(f"window_radius_factor must be >= 5, got {self.window_radius_factor!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError(f"workers must be an integer >= 1, got {self.workers!r}")

    def window_radius(self, lam: float) -> float:
        return self.window_radius_factor / math.sqrt(lam)


@dataclass(frozen=True)
class RealizationOutcome:
    sinr: float
    rate_ok: bool
    cache_hit: bool
    delivery: float


@dataclass(frozen=True)
class RealizationBatch:
    """Per-realization outcomes, indexed by realization number."""

    sinr: np.ndarray
    rate_ok: np.ndarray
    cache_hit: np.ndarray
    delivery: np.ndarray

    def __len__(self):
        return len(self.sinr)


@dataclass(frozen=True)
class EstimateResult:
    outage_mean: float
    delivery_mean: float
    outage_std_err: float
    delivery_std_err: float
    n: int


class RealizationStreams(NamedTuple):
    geometry: np.random.Generator
    fading: np.random.Generator
    request: np.random.Generator


def realization_rng(seed: int, index: int) -> RealizationStreams:
    """Independent streams for realization `index` under master `seed`."""
    key = int(seed)
    return RealizationStreams(*(
        np.random.Generator(np.random.Philox(key=key, counter=[0, 0, sub, int(index)]))
        for sub in range(3)
    ))


class _StreamPool:
    """Reusable Philox streams for consecutive realizations.

    Resetting a generator's counter through its ``state`` gives exactly the
    streams of :func:`realization_rng` at a fraction of the construction cost.
    """

    def __init__(self, seed):
        first = realization_rng(seed, 0)
        self._gens = first
        self._fresh = [g.bit_generator.state for g in first]

    def at(self, index):
        for sub, (gen, fresh) in enumerate(zip(self._gens, self._fresh)):
            state = dict(fresh)
            state["state"] = {"counter": np.array([0, 0, sub, index], dtype=np.uint64),
                              "key": fresh["state"]["key"]}
            gen.bit_generator.state = state
        return self._gens


def _squared_distances(lam, radius, rng, guard=True):
    """Squared distances of a PPP on the disk, in increasing order.

    The squared distances of a planar PPP form a 1-D Poisson process of
    rate ``pi * lam``; arrivals are accumulated until they leave the disk,
    which gives a Poisson(pi * lam * R^2) count of uniform points.
    """
    rate = math.pi * lam
    r2max = radius * radius
    while True:
        mean = rate * r2max
        chunk = int(mean + 6.0 * math.sqrt(mean)) + 16
        parts = []
        last = 0.0
        while True:
            steps = last + np.cumsum(rng.exponential(1.0 / rate, size=chunk))
            parts.append(steps)
            last = steps[-1]
            if last > r2max:
                break
        d2 = np.concatenate(parts) if len(parts) > 1 else parts[0]
        d2 = d2[: np.searchsorted(d2, r2max, side="right")]
        if d2.size > 0 or not guard:
            return d2


def sample_ppp(lam: float, radius: float, rng: np.random.Generator, guard: bool = True) -> np.ndarray:
    """Homogeneous PPP of intensity `lam` on the disk of `radius` about the origin.

    Returns an ``(n, 2)`` array. With `guard` set an empty draw is
    redrawn, so at least one point is returned.
    """
    if not lam > 0:
        raise ValueError(f"density must be > 0, got {lam!r}")
    if not radius > 0:
        raise ValueError(f"radius must be > 0, got {radius!r}")
    r = np.sqrt(_squared_distances(lam, radius, rng, guard))
    theta = rng.uniform(0.0, 2.0 * math.pi, size=r.size)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def _one(net, cache, c_rate, cfg, streams):
    d2 = _squared_distances(net.lam, cfg.window_radius(net.lam), streams.geometry, cfg.min_points_guard)
    scale = 1.0 / net.mu
    h = streams.fading.exponential(scale)
    g = streams.fading.exponential(scale, size=d2.size)
    u = 1.0 - streams.request.random()  # (0, 1]
    if d2.size == 0:
        sinr = 0.0
    else:
        # d2 is sorted: index 0 is the serving (nearest) station
        gain = d2 ** (-0.5 * net.alpha)
        interference = g[1:] @ gain[1:]
        sinr = float(h * gain[0] / (net.noise_power + interference))
    rate_ok = math.log1p(sinr) > net.target_rate
    # requested file f = u^(-1/(gamma-1)); compare logs so f never overflows
    hit = -math.log(u) / (cache.gamma - 1.0) < math.log1p(cache.capacity_files)
    if rate_ok:
        delivery = net.target_rate if hit else c_rate
    else:
        delivery = 0.0
    return sinr, rate_ok, hit, delivery


def realize(net: NetworkParams, cache: CacheParams, backhaul: BackhaulModel, cfg: SimConfig,
            rng: Union[RealizationStreams, np.random.Generator]) -> RealizationOutcome:
    """Draw one network snapshot and one request for the typical user.

    `rng` is either the stream triple from :func:`realization_rng` or a
    single generator used for all draws.
    """
    if isinstance(rng, np.random.Generator):
        rng = RealizationStreams(rng, rng, rng)
    sinr, ok, hit, delivery = _one(net, cache, backhaul_capacity(net.lam, backhaul), cfg, rng)
    return RealizationOutcome(sinr, ok, hit, delivery)


def _run_range(args):
    net, cache, backhaul, cfg, start, stop = args
    c_rate = backhaul_capacity(net.lam, backhaul)
    pool = _StreamPool(cfg.seed)
    out = np.empty((stop - start, 4))
    for j, i in enumerate(range(start, stop)):
        out[j] = _one(net, cache, c_rate, cfg, pool.at(i))
    return out


def run_realizations(net: NetworkParams, cache: CacheParams, backhaul: BackhaulModel,
                     cfg: SimConfig) -> RealizationBatch:
    """Run ``cfg.realizations`` realizations, in index order."""
    n = int(cfg.realizations)
    workers = min(int(cfg.workers), n)
    if workers == 1:
        rows = _run_range((net, cache, backhaul, cfg, 0, n))
    else:
        bounds = np.linspace(0, n, 4 * workers + 1).astype(int)
        jobs = [(net, cache, backhaul, cfg, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = np.concatenate(list(pool.map(_run_range, jobs)))
    return RealizationBatch(
        sinr=rows[:, 0],
        rate_ok=rows[:, 1].astype(bool),
        cache_hit=rows[:, 2].astype(bool),
        delivery=rows[:, 3],
    )


def _mean_and_stderr(x: np.ndarray):
    n = x.size
    mean = math.fsum(x) / n
    if n < 2:
        return mean, math.nan
    var = math.fsum((x - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def estimate(net: NetworkParams, cache: CacheParams, backhaul: BackhaulModel,
             cfg: SimConfig = SimConfig()) -> EstimateResult:
    """Sample means and standard errors of the outage indicator and the
    delivered rate. The standard error is NaN when only one realization
    is run."""
    violation = validate_backhaul_constraint(net, backhaul)
    if violation is not None:
        warnings.warn(str(violation), BackhaulWarning, stacklevel=2)
    batch = run_realizations(net, cache, backhaul, cfg)
    outage = (~(batch.rate_ok & batch.cache_hit)).astype(float)
    out_mean, out_se = _mean_and_stderr(outage)
    del_mean, del_se = _mean_and_stderr(batch.delivery)
    return EstimateResult(out_mean, del_mean, out_se, del_se, len(batch))
