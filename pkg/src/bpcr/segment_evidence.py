"""Single-segment evidence and level moments for every interval of the data.

Entry ``(i, j)`` of each table describes the data ``y[i:j]`` (points
``i+1..j`` in 1-based terms) modelled as one segment whose level is drawn from
the prior.  Only ``i < j`` is meaningful; ``log_a0`` is ``-inf`` elsewhere and
the moment ratios are NaN there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import LOG_2PI, GAUSS, ModelLike, get_model

FLOOR_FACTOR = 1e-12


def as_series(y) -> np.ndarray:
    """Validate observations and return them as a 1-D float array."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size < 1:
        raise ValueError("data series must contain at least one observation")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"non-finite observation at index {bad}")
    return arr


def scale_floor(y) -> float:
    """Smallest admissible rho/sigma for this data: 1e-12 times the data range."""
    y = np.asarray(y, dtype=float)
    rng = float(np.ptp(y)) if y.size else 0.0
    return FLOOR_FACTOR * (rng if rng > 0 else 1.0)


@dataclass(frozen=True)
class Hyperparameters:
    """Level-prior location ``nu``, level-prior scale ``rho`` and noise scale ``sigma``."""

    nu: float
    rho: float
    sigma: float

    def __post_init__(self):
        for name in ("nu", "rho", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.rho <= 0 or self.sigma <= 0:
            raise ValueError(f"rho and sigma must be positive (rho={self.rho}, sigma={self.sigma})")

    def with_sigma(self, sigma: float) -> "Hyperparameters":
        return Hyperparameters(self.nu, self.rho, float(sigma))

    def as_dict(self) -> dict:
        return {"nu": self.nu, "rho": self.rho, "sigma": self.sigma}


@dataclass(frozen=True)
class MomentTables:
    """Per-interval log evidence and posterior level moments.

    ``m1`` and ``m2`` hold the ratios A1/A0 and A2/A0, i.e. the posterior mean
    and second moment of the level, not the raw integrals.
    """

    log_a0: np.ndarray
    m1: np.ndarray
    m2: np.ndarray

    @property
    def n(self) -> int:
        return self.log_a0.shape[0] - 1

    def variance(self) -> np.ndarray:
        return np.maximum(self.m2 - self.m1**2, 0.0)


@dataclass(frozen=True)
class GridSpec:
    """Uniform quadrature grid over level values."""

    step: float
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.step > 0 and self.lo < self.hi):
            raise ValueError(f"invalid grid: step={self.step}, lo={self.lo}, hi={self.hi}")

    @classmethod
    def from_hyper(cls, hp: Hyperparameters, width: float = 25.0, resolution: float = 10.0) -> "GridSpec":
        return cls(step=hp.sigma / resolution, lo=hp.nu - width * hp.rho, hi=hp.nu + width * hp.rho)

    @property
    def size(self) -> int:
        return int(math.ceil((self.hi - self.lo) / self.step)) + 1

    def points(self) -> np.ndarray:
        return self.lo + self.step * np.arange(self.size)


def _upper_mask(n: int) -> np.ndarray:
    return np.triu(np.ones((n + 1, n + 1), dtype=bool), k=1)


def gaussian_moments(y, hp: Hyperparameters) -> MomentTables:
    """Closed-form tables for Gaussian noise with a Gaussian level prior.

    Sums of centred data and squared centred data are accumulated along each
    row, so every entry costs O(1) beyond the running sums.
    """
    y = as_series(y)
    n = y.size
    nu, rho2, sig2 = hp.nu, hp.rho**2, hp.sigma**2

    yc = np.concatenate(([0.0], y - nu))
    upper = _upper_mask(n)
    row = np.broadcast_to(yc, (n + 1, n + 1))
    m = np.cumsum(np.where(upper, row, 0.0), axis=1)
    s = np.cumsum(np.where(upper, row * row, 0.0), axis=1)
    idx = np.arange(n + 1)
    d = (idx[None, :] - idx[:, None]).astype(float)
    d = np.where(upper, d, 1.0)  # dummy value off the upper triangle

    log_a0 = (
        (m * m / (d + sig2 / rho2) - s) / (2.0 * sig2)
        - 0.5 * d * (LOG_2PI + math.log(sig2))
        - 0.5 * np.log1p(d * rho2 / sig2)
    )
    m1 = nu + rho2 * m / (d * rho2 + sig2)
    var = 1.0 / (d / sig2 + 1.0 / rho2)
    m2 = m1 * m1 + var

    log_a0 = np.where(upper, log_a0, -np.inf)
    m1 = np.where(upper, m1, np.nan)
    m2 = np.where(upper, m2, np.nan)
    return MomentTables(log_a0, m1, m2)


def grid_moments(
    y,
    hp: Hyperparameters,
    kind: ModelLike = GAUSS,
    prior_kind: ModelLike | None = None,
    grid: GridSpec | None = None,
) -> MomentTables:
    """Tables for arbitrary noise/prior pairs by rectangle-rule quadrature.

    For each start ``i`` the log integrand on the grid begins as the prior and
    gains one noise log density per added point; every ``(i, j)`` is then
    reduced with a max shift so the moment ratios never see an overflow.
    Intervals whose integrand underflows everywhere get ``log_a0 = -inf`` and
    NaN moments.
    """
    y = as_series(y)
    n = y.size
    noise = get_model(kind)
    prior = get_model(prior_kind if prior_kind is not None else kind)
    grid = grid if grid is not None else GridSpec.from_hyper(hp)
    mu = grid.points()
    log_step = math.log(grid.step)

    log_prior = prior.logpdf(mu, hp.nu, hp.rho)
    log_noise = noise.logpdf(y[:, None], mu[None, :], hp.sigma)  # (n, G)

    log_a0 = np.full((n + 1, n + 1), -np.inf)
    m1 = np.full((n + 1, n + 1), np.nan)
    m2 = np.full((n + 1, n + 1), np.nan)
    mu2 = mu * mu
    for i in range(n):
        acc = log_prior + np.cumsum(log_noise[i:], axis=0)  # rows j = i+1..n
        peak = acc.max(axis=1)
        ok = np.isfinite(peak)
        w = np.exp(acc - np.where(ok, peak, 0.0)[:, None])
        z = w.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_a0[i, i + 1 :] = np.where(ok, peak + np.log(z) + log_step, -np.inf)
            m1[i, i + 1 :] = np.where(ok, (w @ mu) / z, np.nan)
            m2[i, i + 1 :] = np.where(ok, (w @ mu2) / z, np.nan)
    return MomentTables(log_a0, m1, m2)


def moment_tables(y, hp: Hyperparameters, kind: ModelLike = GAUSS, prior_kind: ModelLike | None = None,
                  grid: GridSpec | None = None) -> MomentTables:
    """Closed form when both noise and prior are Gaussian, quadrature otherwise."""
    noise = get_model(kind)
    prior = get_model(prior_kind if prior_kind is not None else kind)
    if noise is GAUSS and prior is GAUSS and grid is None:
        return gaussian_moments(y, hp)
    return grid_moments(y, hp, noise, prior, grid)
