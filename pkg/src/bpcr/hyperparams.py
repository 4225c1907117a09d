"""Cheap estimators for (nu, rho, sigma) and the evidence-versus-sigma scan."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .numerics import GAUSS, ModelLike, get_model
from .segment_evidence import Hyperparameters, as_series, moment_tables, scale_floor


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class QuartileConstants:
    """Upper quartiles of the standard level prior (alpha) and of the
    self-convolved standard noise (beta)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("quartile constants must be positive")

    @classmethod
    def for_models(cls, noise: ModelLike = GAUSS, prior: ModelLike | None = None) -> "QuartileConstants":
        noise = get_model(noise)
        prior = get_model(prior) if prior is not None else noise
        return cls(alpha=prior.alpha, beta=noise.beta)


GAUSS_QUARTILES = QuartileConstants(alpha=0.6744, beta=0.6744 * math.sqrt(2.0))
CAUCHY_QUARTILES = QuartileConstants(alpha=1.0, beta=2.0)


def _order_stat(sorted_x: np.ndarray, num: int, den: int) -> float:
    # 1-based index ceil(num * len / den), as in "rounded up to the next integer"
    k = -(-num * sorted_x.size // den)
    return float(sorted_x[max(k, 1) - 1])


def _floored(nu: float, rho: float, sigma: float, floor: float) -> Hyperparameters:
    return Hyperparameters(float(nu), max(float(rho), floor), max(float(sigma), floor))


def estimate_moments(y, rho_subtract: bool = False) -> Hyperparameters:
    """Global mean/variance for (nu, rho) and the successive-difference
    variance for sigma.

    With ``rho_subtract`` the noise variance is removed from rho^2 (and the
    result floored), which corrects its upward bias at the risk of going to
    zero on noisy data.
    """
    y = as_series(y)
    n = y.size
    if n < 2:
        raise InsufficientDataError("moment estimates need at least 2 observations")
    nu = y.mean()
    rho2 = np.sum((y - nu) ** 2) / (n - 1)
    sig2 = np.sum(np.diff(y) ** 2) / (2 * (n - 1))
    if rho_subtract:
        rho2 = rho2 - sig2
    return _floored(nu, math.sqrt(max(rho2, 0.0)), math.sqrt(sig2), scale_floor(y))


def estimate_quantiles(y, qc: QuartileConstants = GAUSS_QUARTILES, rho_subtract: bool = False) -> Hyperparameters:
    """Median for nu and interquartile ranges of the data and of successive
    differences for rho and sigma.  Robust to outliers."""
    y = as_series(y)
    n = y.size
    if n < 4:
        raise InsufficientDataError("quantile estimates need at least 4 observations")
    ys = np.sort(y)
    ds = np.sort(np.diff(y))
    nu = _order_stat(ys, 1, 2)
    rho = (_order_stat(ys, 3, 4) - _order_stat(ys, 1, 4)) / (2.0 * qc.alpha)
    sigma = (_order_stat(ds, 3, 4) - _order_stat(ds, 1, 4)) / (2.0 * qc.beta)
    if rho_subtract:
        rho = math.sqrt(max(rho * rho - sigma * sigma, 0.0))
    return _floored(nu, rho, sigma, scale_floor(y))


def estimate(y, estimator: str = "moments", noise: ModelLike = GAUSS, prior: ModelLike | None = None,
             rho_subtract: bool = False) -> Hyperparameters:
    if estimator == "moments":
        return estimate_moments(y, rho_subtract=rho_subtract)
    if estimator == "quantile":
        return estimate_quantiles(y, QuartileConstants.for_models(noise, prior), rho_subtract=rho_subtract)
    raise ValueError(f"unknown estimator {estimator!r}")


class ScanPoint(NamedTuple):
    sigma: float
    log_evidence: float
    k_hat: int


def evidence_scan(
    y,
    hp: Hyperparameters,
    sigmas: Iterable[float],
    kind: ModelLike = GAUSS,
    prior_kind: ModelLike | None = None,
    k_max: int | None = None,
) -> list[ScanPoint]:
    """Log evidence and MAP segment count for each sigma, nu and rho fixed.

    For quadrature models the grid step follows the scanned sigma.
    """
    from .dp import build_dp, evidence_and_ck

    y = as_series(y)
    n = y.size
    k_max = n if k_max is None else k_max
    sigmas = [float(s) for s in sigmas]
    if not sigmas:
        raise ValueError("sigma grid is empty")
    out = []
    for s in sigmas:
        if not s > 0:
            raise ValueError(f"sigma must be positive, got {s}")
        mt = moment_tables(y, hp.with_sigma(s), kind, prior_kind)
        dp = build_dp(mt, k_max)
        log_e, _, k_hat = evidence_and_ck(dp)
        out.append(ScanPoint(s, log_e, k_hat))
    return out
