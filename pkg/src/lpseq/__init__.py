"""Estimation over lp balls in the Gaussian sequence model.

Projection estimators for every norm index p in [0, inf], soft thresholding
with its noise-adapted level, closed-form minimax rate control functions
with explicit constants, generators for the signals on which the projection
estimator provably loses, and a reproducible Monte Carlo risk harness.
"""

from .estimators import EstimatorSpec, SampleReduction, estimate, reduce_samples, st_lambda
from .instances import HardInstanceParams, flat_sparse_instance, sparsity_scaling, spike_instance
from .oracles import CheckReport, brute_force_projection, run_suite
from .projection import (
    LpBall,
    ProjectionResult,
    dual_sum,
    find_lambda_star,
    kkt_residual,
    lp_norm,
    project,
    project_clip,
    project_top_s,
)
from .rates import (
    RateBounds,
    RateQuery,
    RegimeLabel,
    RegimeReport,
    classify_regime,
    control_function,
    example_scalings,
    rate_bounds,
)
from .shrinkage import ShrinkageQuery, prox_power, psi_solve, soft_threshold_scalar
from .simulate import (
    ExperimentConfig,
    ExperimentResult,
    RiskEstimate,
    TrialKey,
    default_d_grid,
    estimate_risk,
    fit_log_slope,
    run_experiment,
    sample_observation,
)

__all__ = [
    "CheckReport",
    "EstimatorSpec",
    "ExperimentConfig",
    "ExperimentResult",
    "HardInstanceParams",
    "LpBall",
    "ProjectionResult",
    "RateBounds",
    "RateQuery",
    "RegimeLabel",
    "RegimeReport",
    "RiskEstimate",
    "SampleReduction",
    "ShrinkageQuery",
    "TrialKey",
    "brute_force_projection",
    "classify_regime",
    "control_function",
    "default_d_grid",
    "dual_sum",
    "estimate",
    "estimate_risk",
    "example_scalings",
    "find_lambda_star",
    "fit_log_slope",
    "flat_sparse_instance",
    "kkt_residual",
    "lp_norm",
    "project",
    "project_clip",
    "project_top_s",
    "prox_power",
    "psi_solve",
    "rate_bounds",
    "reduce_samples",
    "run_experiment",
    "run_suite",
    "sample_observation",
    "soft_threshold_scalar",
    "sparsity_scaling",
    "spike_instance",
    "st_lambda",
]

__version__ = "0.1.0"
