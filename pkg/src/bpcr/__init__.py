"""Exact Bayesian regression of piecewise constant functions."""

from .dp import (
    DegenerateEvidenceError,
    DpTables,
    InvariantViolation,
    RegressionResult,
    boundary_posterior,
    build_dp,
    evidence_and_ck,
    loglik_diagnostics,
    regress,
    regression_curve,
    segment_levels,
)
from .hyperparams import (
    CAUCHY_QUARTILES,
    GAUSS_QUARTILES,
    QuartileConstants,
    estimate_moments,
    estimate_quantiles,
    evidence_scan,
)
from .numerics import CAUCHY, GAUSS, NoiseModel, log_binomial, log_density, log_sum_exp
from .pipeline import fit, resolve_hyper
from .segment_evidence import GridSpec, Hyperparameters, MomentTables, gaussian_moments, grid_moments, moment_tables

__version__ = "0.1.0"
