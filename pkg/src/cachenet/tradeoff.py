"""Station density versus total storage.

For a fixed storage budget per unit area ``s_total = lam * S``, find the
smallest density whose outage probability stays under a cap ``p_dagger``.
Spreading the same budget over more stations shrinks each cache, so the
outage is not assumed monotone in ``lam``: a geometric scan locates the
leftmost feasible grid point and bisection then refines the crossing.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy import optimize

from .analytic import QuadratureConfig, coverage_probability, outage_probability
from .core import CacheParams, ExponentialFading, FadingModel, NetworkParams

__all__ = [
    "TradeoffQuery",
    "TradeoffPoint",
    "InfeasibleError",
    "SolverError",
    "outage_at",
    "min_density",
    "tradeoff_curve",
    "saturation_density",
]


class SolverError(ArithmeticError):
    """The feasibility crossing could not be bracketed."""


class InfeasibleError(SolverError):
    """No density in the bracket meets the outage cap.

    ``closest`` holds the density with the lowest outage found (marked
    infeasible), which is where the cap is most nearly met.
    """

    def __init__(self, msg, closest: "TradeoffPoint"):
        super().__init__(msg)
        self.closest = closest


@dataclass(frozen=True)
class TradeoffQuery:
    s_total: float
    p_dagger: float
    target_rate: float
    alpha: float = 4.0
    file_length: float = 1.0
    gamma: float = 2.0
    snr_db: float = 10.0
    bracket: Tuple[float, float] = (1e-4, 10.0)
    tol: float = 1e-6
    scan_points: int = 64
    fading: FadingModel = ExponentialFading()
    quad: Optional[QuadratureConfig] = None

    def __post_init__(self):
        if not 0 < self.p_dagger < 1:
            raise ValueError(f"p_dagger must be in (0, 1), got {self.p_dagger!r}")
        lo, hi = self.bracket
        if not 0 < lo < hi:
            raise ValueError(f"bracket must satisfy 0 < lo < hi, got {self.bracket!r}")
        if not self.s_total > 0:
            raise ValueError(f"s_total must be > 0, got {self.s_total!r}")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.scan_points < 64:
            raise ValueError("scan_points must be >= 64")


@dataclass(frozen=True)
class TradeoffPoint:
    s_total: float
    lambda_star: float
    achieved_outage: float
    feasible: bool


def outage_at(lam: float, query: TradeoffQuery) -> float:
    """Outage at density `lam` when each station stores ``s_total / lam``."""
    if not lam > 0:
        raise ValueError(f"density must be > 0, got {lam!r}")
    net = NetworkParams(lam, query.alpha, query.snr_db, query.target_rate)
    cache = CacheParams(query.s_total / lam, query.file_length, query.gamma)
    return outage_probability(net, cache, query.quad, query.fading).value


def _closest_approach(query, grid, values):
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    best_lam, best_val = grid[i], values[i]
    if hi > lo:
        res = optimize.minimize_scalar(lambda x: outage_at(x, query), bounds=(lo, hi), method="bounded",
                                       options={"xatol": query.tol})
        if res.fun < best_val:
            best_lam, best_val = float(res.x), float(res.fun)
    return TradeoffPoint(query.s_total, best_lam, best_val, False)


def min_density(query: TradeoffQuery) -> TradeoffPoint:
    """Smallest density in the bracket with ``outage <= p_dagger``.

    Raises
    ------
    InfeasibleError
        If every scanned density violates the cap.
    """
    lo, hi = query.bracket
    grid = np.geomspace(lo, hi, query.scan_points)
    values = np.array([outage_at(x, query) for x in grid])
    feasible = np.flatnonzero(values <= query.p_dagger)
    if feasible.size == 0:
        closest = _closest_approach(query, grid, values)
        if closest.achieved_outage <= query.p_dagger:
            # the feasible set is narrower than the scan spacing
            raise SolverError(f"feasibility crossing for s_total={query.s_total} falls between scan points")
        raise InfeasibleError(
            f"outage cap {query.p_dagger} not reachable for s_total={query.s_total} "
            f"in bracket {query.bracket} (best {closest.achieved_outage:.6g})", closest)
    j = int(feasible[0])
    if j == 0:
        return TradeoffPoint(query.s_total, float(lo), float(values[0]), True)

    # invariant: outage(a) > p_dagger >= outage(b)
    a, b = float(grid[j - 1]), float(grid[j])
    pb = float(values[j])
    while b - a > query.tol:
        m = 0.5 * (a + b)
        pm = outage_at(m, query)
        if pm <= query.p_dagger:
            b, pb = m, pm
        else:
            a = m
    return TradeoffPoint(query.s_total, b, pb, True)


def tradeoff_curve(s_total_grid: Iterable[float], template: TradeoffQuery,
                   warm_start: bool = True) -> List[TradeoffPoint]:
    """Solve :func:`min_density` over an ascending grid of storage budgets.

    Infeasible budgets are recorded as points with ``feasible=False``.
    With `warm_start`, the upper end of each bracket is the previous
    optimum: more storage at the same density can only lower the outage, so
    the previous optimum stays feasible and the new one cannot lie above it.
    """
    grid = [float(s) for s in s_total_grid]
    if any(s <= 0 for s in grid):
        raise ValueError("s_total values must be > 0")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("s_total grid must be ascending")
    points = []
    prev = None
    for s in grid:
        q = replace(template, s_total=s)
        if warm_start and prev is not None and prev.feasible and prev.lambda_star > q.bracket[0]:
            q = replace(q, bracket=(q.bracket[0], prev.lambda_star))
        try:
            pt = min_density(q)
        except InfeasibleError as exc:
            pt = exc.closest
        points.append(pt)
        prev = pt
    return points


def saturation_density(query: TradeoffQuery) -> float:
    """Smallest density whose coverage alone meets the cap.

    This is the limit of the optimal density as the storage budget grows
    without bound (every request becomes a cache hit).
    """
    def slack(lam):
        net = NetworkParams(lam, query.alpha, query.snr_db, query.target_rate)
        return 1.0 - coverage_probability(net, query.quad, query.fading).value - query.p_dagger

    lo, hi = query.bracket
    grid = np.geomspace(lo, hi, query.scan_points)
    vals = [slack(x) for x in grid]
    for i in range(1, len(grid)):
        if vals[i - 1] > 0 >= vals[i]:
            return float(optimize.brentq(slack, grid[i - 1], grid[i], xtol=1e-14))
    raise SolverError(f"outage cap {query.p_dagger} not reachable even with unlimited storage")
