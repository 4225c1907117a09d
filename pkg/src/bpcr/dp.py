"""Left/right dynamic program over segmentations and the posterior summaries
derived from it.

All large quantities live in log space.  ``L[k, j]`` is the log of the
summed single-segment evidence products over every split of ``y[:j]`` into
``k`` segments; ``R[k, i]`` is the same for ``y[i:]``.  Neither includes the
uniform boundary prior, which is applied when forming the evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .numerics import CAUCHY, GAUSS, ModelLike, get_model, log_binomial, logsumexp
from .segment_evidence import Hyperparameters, MomentTables


EXP_FLOOR = -700.0


class DegenerateEvidenceError(RuntimeError):
    """Every segment count has zero likelihood."""


class InvariantViolation(RuntimeError):
    """A posterior normalization or table identity failed."""


@dataclass(frozen=True)
class DpTables:
    L: np.ndarray
    R: np.ndarray

    @property
    def k_max(self) -> int:
        return self.L.shape[0] - 1

    @property
    def n(self) -> int:
        return self.L.shape[1] - 1


def _lse_into(m: np.ndarray, axis: int) -> np.ndarray:
    """In-place log-sum-exp of scratch matrix ``m`` along ``axis``."""
    mx = m.max(axis=axis, keepdims=True)
    empty = ~np.isfinite(mx)
    mx[empty] = 0.0
    np.subtract(m, mx, out=m)
    # terms below exp(-700) cannot change a sum whose largest term is 1; clipping
    # them keeps exp out of the (very slow) subnormal range
    np.maximum(m, EXP_FLOOR, out=m)
    np.exp(m, out=m)
    out = np.log(m.sum(axis=axis)) + mx.reshape(-1)
    out[empty.reshape(-1)] = -np.inf
    return out


def _blocks(lo: int, hi: int, size: int):
    for b0 in range(lo, hi, size):
        yield b0, min(b0 + size, hi)


def build_dp(mt: MomentTables, k_max: int | None = None, block: int = 128) -> DpTables:
    """Run both recursions up to ``k_max`` segments in O(k_max n^2).

    Work is split into column (row) blocks so only the triangle where the
    interval is non-empty gets evaluated.
    """
    a0 = mt.log_a0
    n = mt.n
    k_max = n if k_max is None else int(k_max)
    if not 1 <= k_max <= n:
        raise ValueError(f"k_max must lie in [1, n={n}], got {k_max}")

    L = np.full((k_max + 1, n + 1), -np.inf)
    R = np.full((k_max + 1, n + 1), -np.inf)
    L[0, 0] = 0.0
    R[0, n] = 0.0
    scratch = np.empty(n * min(block, n))
    for k in range(k_max):
        m = n - k
        # L[k+1, j] over the last boundary h in [k, j-1]
        for j0, j1 in _blocks(k + 1, n + 1, block):
            h1 = min(j1, n)
            buf = scratch[: (h1 - k) * (j1 - j0)].reshape(h1 - k, j1 - j0)
            np.add(L[k, k:h1, None], a0[k:h1, j0:j1], out=buf)
            L[k + 1, j0:j1] = _lse_into(buf, axis=0)
        # R[k+1, i] over the first boundary h in [i+1, n-k]
        for i0, i1 in _blocks(0, m, block):
            buf = scratch[: (i1 - i0) * (m - i0)].reshape(i1 - i0, m - i0)
            np.add(a0[i0:i1, i0 + 1 : m + 1], R[k, None, i0 + 1 : m + 1], out=buf)
            R[k + 1, i0:i1] = _lse_into(buf, axis=1)
    return DpTables(L, R)


def log_boundary_prior(n: int, k_max: int) -> np.ndarray:
    """``log C(n-1, k-1)`` for k = 1..k_max."""
    return np.array([log_binomial(n - 1, k - 1) for k in range(1, k_max + 1)])


def evidence_and_ck(dp: DpTables) -> tuple[float, np.ndarray, int]:
    """Log evidence, posterior over segment counts (index ``k-1``) and the
    MAP count (smallest on ties)."""
    n, k_max = dp.n, dp.k_max
    terms = dp.L[1:, n] - log_boundary_prior(n, k_max)
    if not np.any(np.isfinite(terms)):
        raise DegenerateEvidenceError("all segment counts have zero evidence")
    log_total = float(logsumexp(terms))
    log_e = log_total - math.log(k_max)
    ck = np.exp(terms - log_total)
    k_hat = int(np.argmax(ck)) + 1
    return log_e, ck, k_hat


class Boundaries(NamedTuple):
    posterior: np.ndarray  # (k_hat + 1, n + 1)
    b_total: np.ndarray  # (n + 1,)
    t_hat: np.ndarray  # (k_hat + 1,)


def boundary_posterior(dp: DpTables, k_hat: int) -> Boundaries:
    """Marginal posterior of each boundary position given ``k_hat`` segments."""
    n = dp.n
    if not 1 <= k_hat <= dp.k_max:
        raise ValueError(f"k_hat must lie in [1, {dp.k_max}]")
    p = np.arange(k_hat + 1)
    with np.errstate(invalid="ignore"):
        log_b = dp.L[p, :] + dp.R[k_hat - p, :] - dp.L[k_hat, n]
    B = np.exp(log_b)
    t_hat = np.argmax(B, axis=1)
    b_total = B[1:k_hat].sum(axis=0) if k_hat > 1 else np.zeros(n + 1)
    return Boundaries(B, b_total, t_hat)


class SegmentLevels(NamedTuple):
    mean: np.ndarray
    std: np.ndarray
    empty: np.ndarray  # True where consecutive boundaries coincide


def segment_levels(mt: MomentTables, t_hat) -> SegmentLevels:
    t_hat = np.asarray(t_hat, dtype=int)
    i, j = t_hat[:-1], t_hat[1:]
    empty = j <= i
    ii, jj = np.where(empty, 0, i), np.where(empty, 1, j)
    m1 = mt.m1[ii, jj]
    var = np.maximum(mt.m2[ii, jj] - m1 * m1, 0.0)
    mean = np.where(empty, np.nan, m1)
    std = np.where(empty, np.nan, np.sqrt(var))
    return SegmentLevels(mean, std, empty)


def _log_tail_weights(dp: DpTables, log_ck_norm: np.ndarray) -> np.ndarray:
    """``T[a, j] = log sum_k c_k R[k-1-a, j]`` for a = 0..k_max-1.

    ``log_ck_norm[k-1]`` is ``log(C_k / Q(y|k))``; entries at ``-inf`` are
    skipped.
    """
    k_max, n = dp.k_max, dp.n
    T = np.full((k_max, n + 1), -np.inf)
    for k in np.flatnonzero(np.isfinite(log_ck_norm)) + 1:
        T[:k] = np.logaddexp(T[:k], log_ck_norm[k - 1] + dp.R[k - 1 :: -1][:k])
    return T


def segment_weights(mt: MomentTables, dp: DpTables, log_ck_norm: np.ndarray, block: int = 128) -> np.ndarray:
    """Log posterior probability that ``y[i:j]`` is exactly one segment.

    With a single finite entry in ``log_ck_norm`` this conditions on that
    segment count; with more entries it averages over counts.
    """
    n = dp.n
    T = _log_tail_weights(dp, log_ck_norm)
    a0_max = np.max(mt.log_a0)
    # Upper bound on each term's contribution; below exp(-800) it is exactly zero.
    live = [a for a in range(T.shape[0]) if np.max(dp.L[a]) + np.max(T[a]) + a0_max >= -800.0]
    W = np.full((n + 1, n + 1), -np.inf)
    for i0, i1 in _blocks(0, n, block):
        la = dp.L[live, i0:i1, None]
        ta = T[live, None, i0 + 1 :]
        peak = np.full((i1 - i0, n - i0), -np.inf)
        for x, z in zip(la, ta):
            np.maximum(peak, x + z, out=peak)
        empty = ~np.isfinite(peak)
        peak[empty] = 0.0
        acc = np.zeros_like(peak)
        tmp = np.empty_like(peak)
        for x, z in zip(la, ta):
            np.add(x, z, out=tmp)
            tmp -= peak
            np.maximum(tmp, EXP_FLOOR, out=tmp)
            acc += np.exp(tmp, out=tmp)
        out = np.log(acc) + peak
        out[empty] = -np.inf
        W[i0:i1, i0 + 1 :] = out
    W = W + mt.log_a0
    W[~np.triu(np.ones_like(W, dtype=bool), k=1)] = -np.inf
    return W


def map_k_norm(dp: DpTables, k_hat: int) -> np.ndarray:
    c = np.full(dp.k_max, -np.inf)
    c[k_hat - 1] = -dp.L[k_hat, dp.n]
    return c


def mixture_norm(dp: DpTables, ck: np.ndarray, cutoff: float = 1e-20) -> np.ndarray:
    with np.errstate(divide="ignore"):
        c = np.log(ck) - dp.L[1:, dp.n]
    c[ck < cutoff * ck.max()] = -np.inf
    return c


def accumulate_curve(F: np.ndarray) -> np.ndarray:
    """Sum ``F[i, j]`` over all ``i < t <= j`` for t = 1..n, updating the
    running sum as t advances instead of re-summing each window."""
    n = F.shape[0] - 1
    rows = F.sum(axis=1)  # segments starting right after t
    cols = F.sum(axis=0)  # segments ending at t
    return np.cumsum(rows[:n] - cols[:n])


class Curve(NamedTuple):
    mean: np.ndarray
    std: np.ndarray
    mass: np.ndarray


def curve_from_weights(mt: MomentTables, log_w: np.ndarray) -> Curve:
    live = log_w > EXP_FLOOR
    F0 = np.where(live, np.exp(np.maximum(log_w, EXP_FLOOR)), 0.0)
    F1 = np.where(live, F0 * np.where(live, mt.m1, 0.0), 0.0)
    F2 = np.where(live, F0 * np.where(live, mt.m2, 0.0), 0.0)
    mass = accumulate_curve(F0)
    mean = accumulate_curve(F1)
    second = accumulate_curve(F2)
    std = np.sqrt(np.maximum(second - mean * mean, 0.0))
    return Curve(mean, std, mass)


def regression_curve(mt: MomentTables, dp: DpTables, k_hat: int, mode: str = "map-k",
                     ck: np.ndarray | None = None) -> Curve:
    """Posterior mean level and its standard deviation at every index.

    ``mode="map-k"`` conditions on ``k_hat`` segments; ``"mixture"`` averages
    over segment counts weighted by ``ck``.
    """
    if mode == "map-k":
        norm = map_k_norm(dp, k_hat)
    elif mode == "mixture":
        if ck is None:
            raise ValueError("mixture curve needs the segment-count posterior")
        norm = mixture_norm(dp, ck)
    else:
        raise ValueError(f"unknown curve mode {mode!r}")
    return curve_from_weights(mt, segment_weights(mt, dp, norm))


def piecewise_fit(n: int, t_hat, seg_mean) -> np.ndarray:
    """Expand boundaries and levels into the length-``n`` step function."""
    f = np.full(n, np.nan)
    for (i, j), mu in zip(zip(t_hat[:-1], t_hat[1:]), seg_mean):
        if j > i:
            f[i:j] = mu
    return f


def _log_noise_moments(model) -> tuple[float, float]:
    """Mean and variance of log p(z) for the standard noise density."""
    if model is GAUSS:
        return -0.5 * math.log(2 * math.pi * math.e), 0.5
    if model is CAUCHY:
        return -math.log(4 * math.pi), math.pi**2 / 3
    pdf = lambda z: math.exp(model.std_logpdf(np.float64(z)))
    m1 = integrate.quad(lambda z: pdf(z) * model.std_logpdf(np.float64(z)), -np.inf, np.inf)[0]
    m2 = integrate.quad(lambda z: pdf(z) * model.std_logpdf(np.float64(z)) ** 2, -np.inf, np.inf)[0]
    return m1, m2 - m1 * m1


def loglik_diagnostics(y, fhat, sigma: float, kind: ModelLike = GAUSS) -> tuple[float, float, float]:
    """Log-likelihood of ``y`` under the step fit and its expected value and
    standard deviation if ``y`` really were drawn from that fit."""
    model = get_model(kind)
    y = np.asarray(y, dtype=float)
    fhat = np.asarray(fhat, dtype=float)
    ok = np.isfinite(fhat)
    n = int(ok.sum())
    ll = float(np.sum(model.logpdf(y[ok], fhat[ok], sigma)))
    mean1, var1 = _log_noise_moments(model)
    return ll, n * (mean1 - math.log(sigma)), math.sqrt(n * var1)


@dataclass
class RegressionResult:
    """Everything a fit reports.  Arrays are indexed as documented per field."""

    log_evidence: float
    ck: np.ndarray  # ck[k-1] = P(k | y), k = 1..k_max
    k_hat: int
    boundary_posterior: np.ndarray  # [p, h], p = 0..k_hat, h = 0..n
    b_total: np.ndarray  # length n + 1, inner boundaries only
    t_hat: np.ndarray  # length k_hat + 1, from 0 to n
    seg_mean: np.ndarray
    seg_std: np.ndarray
    empty_segments: np.ndarray
    curve_mean: np.ndarray  # length n, index t-1
    curve_std: np.ndarray
    curve_mass: np.ndarray
    ll: float
    ll_mean: float
    ll_std: float
    hyper: Hyperparameters
    noise: str = "gauss"
    prior: str = "gauss"
    k_max: int = 0
    curve_mode: str = "map-k"
    tables: MomentTables | None = field(default=None, repr=False)
    dp: DpTables | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.curve_mean.size

    @property
    def rel_loglik(self) -> float:
        return (self.ll - self.ll_mean) / self.ll_std if self.ll_std > 0 else float("nan")

    @property
    def fhat(self) -> np.ndarray:
        return piecewise_fit(self.n, self.t_hat, self.seg_mean)

    def check_invariants(self, ck_tol: float = 1e-9, row_tol: float = 1e-6, mass_tol: float = 1e-6) -> None:
        """Raise :class:`InvariantViolation` if any posterior fails to normalize."""
        problems = []
        if abs(self.ck.sum() - 1.0) > ck_tol:
            problems.append(f"sum C_k = {self.ck.sum()!r}")
        rows = self.boundary_posterior.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > row_tol):
            problems.append(f"boundary rows sum to {rows.min()!r}..{rows.max()!r}")
        if np.any(np.abs(self.curve_mass - 1.0) > mass_tol):
            problems.append(f"curve mass in {self.curve_mass.min()!r}..{self.curve_mass.max()!r}")
        if np.any(self.curve_std < 0) or np.any(self.seg_std[~self.empty_segments] < 0):
            problems.append("negative standard deviation")
        if problems:
            raise InvariantViolation("; ".join(problems))

    def to_dict(self) -> dict:
        return {
            "log_evidence": self.log_evidence,
            "ck": self.ck.tolist(),
            "k_hat": self.k_hat,
            "t_hat": [int(t) for t in self.t_hat],
            "seg_mean": self.seg_mean.tolist(),
            "seg_std": self.seg_std.tolist(),
            "empty_segments": [bool(e) for e in self.empty_segments],
            "ll": self.ll,
            "ll_mean": self.ll_mean,
            "ll_std": self.ll_std,
            "rel_loglik": self.rel_loglik,
            "hyperparameters": self.hyper.as_dict(),
            "noise": self.noise,
            "prior": self.prior,
            "k_max": self.k_max,
            "n": self.n,
            "curve_mode": self.curve_mode,
        }


def regress(y, mt: MomentTables, hp: Hyperparameters, k_max: int | None = None, noise: ModelLike = GAUSS,
            prior: ModelLike | None = None, curve: str = "map-k", check: bool = True) -> RegressionResult:
    """Run the dynamic program on precomputed tables and collect all summaries."""
    n = mt.n
    k_max = n if k_max is None else int(k_max)
    noise_m = get_model(noise)
    prior_m = get_model(prior) if prior is not None else noise_m
    dp = build_dp(mt, k_max)
    log_e, ck, k_hat = evidence_and_ck(dp)
    bnd = boundary_posterior(dp, k_hat)
    levels = segment_levels(mt, bnd.t_hat)
    cv = regression_curve(mt, dp, k_hat, mode=curve, ck=ck)
    fhat = piecewise_fit(n, bnd.t_hat, levels.mean)
    ll, ll_mean, ll_std = loglik_diagnostics(y, fhat, hp.sigma, noise_m)
    res = RegressionResult(
        log_evidence=log_e, ck=ck, k_hat=k_hat,
        boundary_posterior=bnd.posterior, b_total=bnd.b_total, t_hat=bnd.t_hat,
        seg_mean=levels.mean, seg_std=levels.std, empty_segments=levels.empty,
        curve_mean=cv.mean, curve_std=cv.std, curve_mass=cv.mass,
        ll=ll, ll_mean=ll_mean, ll_std=ll_std, hyper=hp,
        noise=noise_m.name, prior=prior_m.name, k_max=k_max, curve_mode=curve,
        tables=mt, dp=dp,
    )
    if check:
        res.check_invariants()
    return res
