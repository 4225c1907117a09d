from __future__ import annotations

from dataclasses import replace

from .dp import RegressionResult, regress
from .hyperparams import estimate
from .numerics import GAUSS, ModelLike, get_model
from .segment_evidence import Hyperparameters, as_series, moment_tables, scale_floor


def default_estimator(noise: ModelLike) -> str:
    return "moments" if get_model(noise) is GAUSS else "quantile"


def resolve_hyper(y, noise: ModelLike = GAUSS, prior: ModelLike | None = None, estimator: str | None = None,
                  nu: float | None = None, rho: float | None = None, sigma: float | None = None,
                  rho_subtract: bool = False) -> Hyperparameters:
    """Estimate hyper-parameters from ``y`` and apply any explicit overrides.

    Series too short for the estimator fall back to (mean, 1, 1) scaled by the
    data range, unless all three values are given.
    """
    y = as_series(y)
    estimator = estimator or default_estimator(noise)
    if nu is not None and rho is not None and sigma is not None:
        return Hyperparameters(float(nu), float(rho), float(sigma))
    try:
        hp = estimate(y, estimator, noise, prior, rho_subtract=rho_subtract)
    except ValueError:
        spread = max(float(y.max() - y.min()), 1.0)
        hp = Hyperparameters(float(y.mean()), spread, spread)
    floor = scale_floor(y)
    return replace(
        hp,
        nu=hp.nu if nu is None else float(nu),
        rho=hp.rho if rho is None else max(float(rho), floor),
        sigma=hp.sigma if sigma is None else max(float(sigma), floor),
    )


def fit(y, noise: ModelLike = GAUSS, prior: ModelLike | None = None, k_max: int | None = None,
        estimator: str | None = None, nu: float | None = None, rho: float | None = None,
        sigma: float | None = None, rho_subtract: bool = False, curve: str = "map-k",
        check: bool = True) -> RegressionResult:
    """Fit a piecewise constant function to ``y``.

    ``noise`` and ``prior`` name the noise and level-prior families
    (``"gauss"`` or ``"cauchy"``, or a :class:`~bpcr.numerics.NoiseModel`);
    the prior defaults to the noise family.  Hyper-parameters not given
    explicitly are estimated with ``estimator`` (moments for Gaussian noise,
    quartiles otherwise).  ``k_max`` defaults to ``len(y)``; with a small
    ``sigma`` that default lets every point become its own segment.
    """
    y = as_series(y)
    prior = prior if prior is not None else noise
    hp = resolve_hyper(y, noise, prior, estimator, nu, rho, sigma, rho_subtract)
    mt = moment_tables(y, hp, noise, prior)
    return regress(y, mt, hp, k_max=k_max, noise=noise, prior=prior, curve=curve, check=check)
