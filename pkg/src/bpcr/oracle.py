"""Brute-force reference: enumerate every segmentation of a short series.

Deliberately shares nothing with the dynamic program beyond the moment
tables.  Weights are kept in linear space relative to a single global log
offset, and the boundary prior uses exact integer binomials.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .segment_evidence import MomentTables

MAX_N = 14


@dataclass
class Segmentation:
    k: int
    t: tuple[int, ...]


def segmentations(n: int, k: int):
    """All boundary vectors 0 = t_0 < ... < t_k = n."""
    for inner in itertools.combinations(range(1, n), k - 1):
        yield Segmentation(k, (0, *inner, n))


@dataclass
class OracleResult:
    log_evidence: float
    ck: np.ndarray
    k_hat: int
    boundary_posterior: np.ndarray
    t_hat: np.ndarray
    seg_mean: np.ndarray
    curve_mean: np.ndarray
    curve_second: np.ndarray
    mixture_mean: np.ndarray
    counts: dict


def enumerate_posterior(mt: MomentTables, k_max: int | None = None) -> OracleResult:
    n = mt.n
    if n > MAX_N:
        raise ValueError(f"enumeration is limited to n <= {MAX_N}, got {n}")
    k_max = n if k_max is None else k_max
    a0, m1, m2 = mt.log_a0, mt.m1, mt.m2

    segs, logw = [], []
    counts = {}
    for k in range(1, k_max + 1):
        log_prior = -math.log(k_max) - math.log(math.comb(n - 1, k - 1))
        counts[k] = 0
        for s in segmentations(n, k):
            segs.append(s)
            logw.append(log_prior + sum(a0[s.t[m - 1], s.t[m]] for m in range(1, k + 1)))
            counts[k] += 1
    logw = np.array(logw)
    offset = logw.max()
    w = np.exp(logw - offset)
    total = w.sum()
    log_evidence = offset + math.log(total)

    ks = np.array([s.k for s in segs])
    ck = np.array([w[ks == k].sum() for k in range(1, k_max + 1)]) / total
    k_hat = int(np.argmax(ck)) + 1

    B = np.zeros((k_hat + 1, n + 1))
    curve1 = np.zeros(n)
    curve2 = np.zeros(n)
    mix1 = np.zeros(n)
    for s, ws in zip(segs, w):
        level1 = np.empty(n)
        level2 = np.empty(n)
        for i, j in zip(s.t[:-1], s.t[1:]):
            level1[i:j] = m1[i, j]
            level2[i:j] = m2[i, j]
        mix1 += ws * level1
        if s.k == k_hat:
            for p, h in enumerate(s.t):
                B[p, h] += ws
            curve1 += ws * level1
            curve2 += ws * level2
    mass = w[ks == k_hat].sum()
    B /= mass
    t_hat = np.argmax(B, axis=1)
    seg_mean = np.array([m1[i, j] if j > i else np.nan for i, j in zip(t_hat[:-1], t_hat[1:])])
    return OracleResult(
        log_evidence=log_evidence, ck=ck, k_hat=k_hat, boundary_posterior=B, t_hat=t_hat,
        seg_mean=seg_mean, curve_mean=curve1 / mass, curve_second=curve2 / mass,
        mixture_mean=mix1 / total, counts=counts,
    )


def _rel(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    both_nan = np.isnan(a) & np.isnan(b)
    scale = np.maximum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(scale > 0, np.abs(a - b) / scale, 0.0)
    r = np.where(both_nan, 0.0, r)
    return float(np.max(r)) if r.size else 0.0


def compare(result, ref: OracleResult) -> dict:
    """Largest relative deviation of each posterior summary from the oracle.

    Evidence is compared in linear space (``|E_dp / E_ref - 1|``); boundary
    estimates must match exactly and contribute ``inf`` otherwise.
    """
    dev = {
        "evidence": abs(math.expm1(result.log_evidence - ref.log_evidence)),
        "ck": _rel(result.ck, ref.ck),
    }
    if result.k_hat != ref.k_hat:
        dev["k_hat"] = math.inf
        return dev
    dev["k_hat"] = 0.0
    dev["boundary_posterior"] = _rel(result.boundary_posterior, ref.boundary_posterior)
    dev["t_hat"] = 0.0 if np.array_equal(result.t_hat, ref.t_hat) else math.inf
    dev["seg_mean"] = _rel(result.seg_mean, ref.seg_mean)
    dev["curve_mean"] = _rel(result.curve_mean, ref.curve_mean)
    return dev
