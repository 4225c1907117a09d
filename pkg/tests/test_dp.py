import math

import numpy as np
import pytest

from bpcr import fit
from bpcr.dp import (
    accumulate_curve,
    boundary_posterior,
    build_dp,
    evidence_and_ck,
    loglik_diagnostics,
    regress,
    segment_levels,
)
from bpcr.oracle import compare, enumerate_posterior
from bpcr.segment_evidence import Hyperparameters, gaussian_moments, grid_moments
from bpcr.synthgen import generate

from conftest import assert_normalized


def _tables(y, hp=None):
    hp = hp or Hyperparameters(float(np.mean(y)), 1.0, 0.5)
    return gaussian_moments(y, hp), hp


def test_first_row_is_single_segment(rng):
    mt, _ = _tables(rng.normal(size=9))
    dp = build_dp(mt)
    np.testing.assert_array_equal(dp.L[1, 1:], mt.log_a0[0, 1:])
    np.testing.assert_array_equal(dp.R[1, :-1], mt.log_a0[:-1, -1])
    assert dp.L[0, 0] == 0.0 and np.all(np.isneginf(dp.L[0, 1:]))


def test_two_segments_of_three_points(rng):
    mt, _ = _tables(rng.normal(size=3))
    dp = build_dp(mt)
    a = mt.log_a0
    expected = np.logaddexp(a[0, 1] + a[1, 3], a[0, 2] + a[2, 3])
    assert dp.L[2, 3] == pytest.approx(expected, abs=1e-13)


def test_left_and_right_agree_on_full_series(rng):
    mt, _ = _tables(rng.normal(size=40))
    dp = build_dp(mt)
    np.testing.assert_allclose(dp.L[1:, 40], dp.R[1:, 0], rtol=1e-12)


def test_support_pattern(rng):
    mt, _ = _tables(rng.normal(size=12))
    dp = build_dp(mt)
    k = np.arange(dp.k_max + 1)[:, None]
    j = np.arange(13)[None, :]
    # zero segments only cover the empty prefix (or suffix)
    assert np.array_equal(np.isneginf(dp.L), (j < k) | ((k == 0) & (j > 0)))
    assert np.array_equal(np.isneginf(dp.R), (12 - j < k) | ((k == 0) & (j < 12)))


@pytest.mark.parametrize("block", [1, 3, 7, 128])
def test_block_size_does_not_change_results(rng, block):
    mt, _ = _tables(rng.normal(size=30))
    ref = build_dp(mt, block=1000)
    dp = build_dp(mt, block=block)
    np.testing.assert_allclose(dp.L, ref.L, rtol=1e-13)
    np.testing.assert_allclose(dp.R, ref.R, rtol=1e-13)


def test_single_observation():
    mt, hp = _tables(np.array([0.3]))
    res = regress([0.3], mt, hp)
    assert res.k_hat == 1
    np.testing.assert_array_equal(res.ck, [1.0])
    np.testing.assert_array_equal(res.t_hat, [0, 1])
    assert res.log_evidence == pytest.approx(mt.log_a0[0, 1])


def test_k_max_validation(rng):
    mt, _ = _tables(rng.normal(size=5))
    for bad in (0, 6):
        with pytest.raises(ValueError):
            build_dp(mt, bad)


def test_boundary_posterior_rows(steps_series):
    res = fit(steps_series)
    B = res.boundary_posterior
    n = steps_series.size
    assert B[0, 0] == pytest.approx(1.0) and B[0, 1:].sum() == pytest.approx(0.0, abs=1e-300)
    assert B[-1, n] == pytest.approx(1.0)
    np.testing.assert_allclose(B.sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(res.b_total, B[1:-1].sum(axis=0))
    assert_normalized(res)


def test_reversal_symmetry(rng):
    y = np.repeat([0.0, 1.5, -0.5], [15, 10, 20]) + rng.normal(0, 0.3, 45)
    hp = Hyperparameters(0.2, 1.0, 0.3)
    a = regress(y, gaussian_moments(y, hp), hp)
    b = regress(y[::-1], gaussian_moments(y[::-1], hp), hp)
    assert a.log_evidence == pytest.approx(b.log_evidence, rel=1e-10)
    np.testing.assert_allclose(a.ck, b.ck, rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(a.b_total, b.b_total[::-1], rtol=1e-10, atol=1e-14)
    np.testing.assert_allclose(a.curve_mean, b.curve_mean[::-1], rtol=1e-10, atol=1e-12)


def test_shift_equivariance(rng):
    y = rng.normal(size=25)
    hp = Hyperparameters(0.1, 1.0, 0.6)
    a = regress(y, gaussian_moments(y, hp), hp)
    hs = Hyperparameters(10.1, 1.0, 0.6)
    b = regress(y + 10, gaussian_moments(y + 10, hs), hs)
    np.testing.assert_allclose(a.ck, b.ck, rtol=1e-8, atol=1e-15)
    np.testing.assert_allclose(a.curve_mean + 10, b.curve_mean, rtol=1e-10)
    assert a.log_evidence == pytest.approx(b.log_evidence, rel=1e-9)


def test_constant_fit_gives_flat_curve():
    y = np.array([1.0, 1.1, 0.9, 1.05, 0.95])
    hp = Hyperparameters(1.0, 1.0, 0.2)
    res = regress(y, gaussian_moments(y, hp), hp, k_max=1)
    assert res.k_hat == 1
    np.testing.assert_allclose(res.curve_mean, res.tables.m1[0, 5], rtol=1e-12)
    np.testing.assert_allclose(res.curve_mass, 1.0, rtol=1e-12)


def test_segment_levels_flag_empty():
    mt, _ = _tables(np.arange(6.0))
    lv = segment_levels(mt, [0, 2, 2, 6])
    assert lv.empty.tolist() == [False, True, False]
    assert np.isnan(lv.mean[1]) and np.isnan(lv.std[1])
    assert lv.mean[0] == mt.m1[0, 2]


def test_incremental_curve_matches_direct_sum(rng):
    F = np.triu(rng.random((13, 13)), k=1)
    direct = np.array([sum(F[i, j] for i in range(t) for j in range(t, 13) if j > i) for t in range(1, 13)])
    np.testing.assert_allclose(accumulate_curve(F), direct, rtol=1e-13)


def test_map_k_evidence_is_consistent(steps_series):
    res = fit(steps_series)
    log_e, ck, k_hat = evidence_and_ck(res.dp)
    assert k_hat == res.k_hat == int(np.argmax(res.ck)) + 1
    bnd = boundary_posterior(res.dp, k_hat)
    np.testing.assert_array_equal(bnd.t_hat, res.t_hat)


def test_steps_are_recovered(steps_series):
    res = fit(steps_series)
    assert res.k_hat == 3
    assert res.t_hat.tolist() == [0, 12, 25, 40]
    np.testing.assert_allclose(res.seg_mean, [0, 2, 0.5], atol=0.3)


@pytest.mark.parametrize("k_max", [1, 2, 4])
def test_restricted_k_max_matches_oracle(rng, k_max):
    y = rng.normal(size=9) + np.repeat([0, 3, 0], 3)
    mt, hp = _tables(y, Hyperparameters(1.0, 2.0, 0.7))
    res = regress(y, mt, hp, k_max=k_max)
    ref = enumerate_posterior(mt, k_max)
    assert max(compare(res, ref).values()) <= 1e-9
    assert res.ck.size == k_max


def test_mixture_curve_matches_oracle(rng):
    for _ in range(10):
        n = int(rng.integers(2, 11))
        y = rng.normal(size=n) * 2
        mt, hp = _tables(y)
        res = regress(y, mt, hp, curve="mixture")
        ref = enumerate_posterior(mt)
        np.testing.assert_allclose(res.curve_mean, ref.mixture_mean, rtol=1e-9, atol=1e-12)


def test_map_k_second_moment_matches_oracle(rng):
    y = rng.normal(size=8) + np.repeat([0, 2], 4)
    mt, hp = _tables(y)
    res = regress(y, mt, hp)
    ref = enumerate_posterior(mt)
    std = np.sqrt(np.maximum(ref.curve_second - ref.curve_mean**2, 0))
    np.testing.assert_allclose(res.curve_std, std, rtol=1e-7, atol=1e-10)


def test_cauchy_fit_normalizes():
    y, _ = generate("cl", 0, n=40)
    res = fit(y, noise="cauchy")
    assert res.noise == "cauchy" and res.prior == "cauchy"
    assert_normalized(res)


def test_grid_tables_feed_the_program(rng):
    y = rng.normal(size=8)
    hp = Hyperparameters(0.0, 1.0, 0.5)
    mt = grid_moments(y, hp, "cauchy", "gauss")
    res = regress(y, mt, hp, noise="cauchy", prior="gauss")
    assert max(compare(res, enumerate_posterior(mt)).values()) <= 1e-9


def test_loglik_exact_fit():
    y = np.zeros(50)
    ll, mean, std = loglik_diagnostics(y, y, 1.0)
    assert ll == pytest.approx(-25 * math.log(2 * math.pi))
    assert std == pytest.approx(5.0)
    # ll - E[ll] = n/2 with sd sqrt(n/2): relative value sqrt(n/2)
    assert (ll - mean) / std == pytest.approx(5.0)


def test_loglik_cauchy_variance():
    _, mean, std = loglik_diagnostics(np.zeros(12), np.zeros(12), 2.0, "cauchy")
    assert std**2 == pytest.approx(12 * math.pi**2 / 3)
    assert mean == pytest.approx(12 * (-math.log(4 * math.pi) - math.log(2.0)))


def test_loglik_skips_empty_segments():
    y = np.arange(4.0)
    f = np.array([0.0, np.nan, 2.0, 3.0])
    ll, mean, _ = loglik_diagnostics(y, f, 1.0)
    assert ll == pytest.approx(-1.5 * math.log(2 * math.pi))
    assert mean == pytest.approx(-1.5 * math.log(2 * math.pi * math.e))


def test_to_dict_is_plain(steps_series):
    d = fit(steps_series).to_dict()
    assert d["k_hat"] == 3 and d["n"] == 40
    assert isinstance(d["t_hat"][0], int) and isinstance(d["ck"], list)
    assert set(d["hyperparameters"]) == {"nu", "rho", "sigma"}
