"""Log-space arithmetic and the location-scale densities used for noise and level priors.

Zero probability is represented by ``-inf`` throughout; densities and
probabilities share the same log representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)
LOG_PI = math.log(math.pi)


def log_sum_exp(a: float, b: float) -> float:
    """Return ``log(exp(a) + exp(b))`` without overflow or underflow."""
    hi, lo = (a, b) if a >= b else (b, a)
    if hi == -math.inf or hi == math.inf:
        return hi
    return hi + math.log1p(math.exp(lo - hi))


def logsumexp(a: np.ndarray, axis: int | None = None) -> np.ndarray:
    """Reduce ``a`` by log-sum-exp along ``axis``.

    Slices that are entirely ``-inf`` reduce to ``-inf`` (no NaN).
    """
    a = np.asarray(a, dtype=float)
    mx = np.max(a, axis=axis, keepdims=True)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - mx), axis=axis, keepdims=True)) + mx
    if axis is None:
        return out.reshape(())[()]
    return np.squeeze(out, axis=axis)


def log_binomial(n: int, k: int) -> float:
    """Natural log of the binomial coefficient C(n, k).

    Summed term by term with ``math.fsum`` over ``min(k, n - k)`` ratios, which
    keeps the relative error near machine precision where a log-gamma
    difference would lose digits to cancellation for large ``n``.
    """
    n, k = int(n), int(k)
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"log_binomial requires 0 <= k <= n, got n={n}, k={k}")
    kk = min(k, n - k)
    if kk == 0:
        return 0.0
    i = np.arange(1, kk + 1, dtype=float)
    return math.fsum(np.log((n - kk) + i)) - math.fsum(np.log(i))


@dataclass(frozen=True)
class NoiseModel:
    """A symmetric location-scale family.

    ``std_logpdf`` is the log density of the standardized variable.
    ``alpha`` is the upper quartile of the standard density (used when the
    family serves as the level prior) and ``beta`` the upper quartile of the
    density convolved once with itself (used when it serves as noise).
    """

    name: str
    std_logpdf: Callable[[np.ndarray], np.ndarray]
    alpha: float
    beta: float

    def logpdf(self, y, mu, s):
        s = np.asarray(s, dtype=float)
        if np.any(s <= 0):
            raise ValueError("scale must be positive")
        z = (np.asarray(y, dtype=float) - mu) / s
        return self.std_logpdf(z) - np.log(s)


def _gauss_std_logpdf(z):
    return -0.5 * z * z - 0.5 * LOG_2PI


def _cauchy_std_logpdf(z):
    return -LOG_PI - np.log1p(z * z)


GAUSS = NoiseModel("gauss", _gauss_std_logpdf, alpha=0.6744, beta=0.6744 * math.sqrt(2.0))
CAUCHY = NoiseModel("cauchy", _cauchy_std_logpdf, alpha=1.0, beta=2.0)

MODELS = {"gauss": GAUSS, "gaussian": GAUSS, "cauchy": CAUCHY}

ModelLike = Union[str, NoiseModel]


def get_model(kind: ModelLike) -> NoiseModel:
    if isinstance(kind, NoiseModel):
        return kind
    try:
        return MODELS[str(kind).lower()]
    except KeyError:
        raise ValueError(f"unknown noise model {kind!r}; expected one of {sorted(MODELS)}") from None


def log_density(kind: ModelLike, y, mu, s):
    """Log density of ``y`` under ``kind`` with location ``mu`` and scale ``s``.

    >>> round(float(log_density("gauss", 0.0, 0.0, 1.0)), 7)
    -0.9189385
    """
    if np.any(np.asarray(s) <= 0):
        raise ValueError("scale must be positive")
    return get_model(kind).logpdf(y, mu, s)
