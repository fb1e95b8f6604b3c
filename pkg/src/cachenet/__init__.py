"""Outage and delivery-rate analysis of cache-enabled small-cell networks
with Poisson-distributed base stations."""

from .analytic import (
    AnalyticResult,
    EvaluationPath,
    ProbabilityRangeError,
    QuadratureConfig,
    QuadratureError,
    avg_delivery_rate,
    beta,
    coverage_probability,
    outage_probability,
    rho,
)
from .core import (
    BackhaulModel,
    BackhaulViolation,
    BackhaulWarning,
    CacheParams,
    DeterministicFading,
    ExponentialFading,
    NetworkParams,
    backhaul_capacity,
    cache_hit_probability,
    validate_backhaul_constraint,
)
from .montecarlo import (
    EstimateResult,
    RealizationBatch,
    RealizationOutcome,
    SimConfig,
    estimate,
    realization_rng,
    realize,
    run_realizations,
    sample_ppp,
)
from .special import q_function, scaled_exp_q
from .tradeoff import (
    InfeasibleError,
    SolverError,
    TradeoffPoint,
    TradeoffQuery,
    min_density,
    outage_at,
    saturation_density,
    tradeoff_curve,
)

__version__ = "0.1.0"
