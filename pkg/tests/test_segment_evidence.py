import math

import numpy as np
import pytest
from scipy import integrate, stats

from bpcr.hyperparams import estimate_moments
from bpcr.segment_evidence import (
    GridSpec,
    Hyperparameters,
    as_series,
    gaussian_moments,
    grid_moments,
    moment_tables,
    scale_floor,
)

UNIT = Hyperparameters(nu=0.0, rho=1.0, sigma=1.0)


def test_single_point_gaussian():
    mt = gaussian_moments([0.0], UNIT)
    # marginal of one point is N(0, sigma^2 + rho^2) = N(0, 2)
    assert mt.log_a0[0, 1] == pytest.approx(math.log(1 / math.sqrt(4 * math.pi)), abs=1e-12)
    assert mt.log_a0[0, 1] == pytest.approx(-1.2655121, abs=1e-7)
    assert mt.m1[0, 1] == 0.0
    assert mt.m2[0, 1] - mt.m1[0, 1] ** 2 == pytest.approx(0.5, abs=1e-15)


def test_tables_undefined_off_upper_triangle(rng):
    mt = gaussian_moments(rng.normal(size=5), UNIT)
    lower = ~np.triu(np.ones((6, 6), dtype=bool), k=1)
    assert np.all(np.isneginf(mt.log_a0[lower]))
    assert np.all(np.isnan(mt.m1[lower]))
    assert np.all(np.isfinite(mt.log_a0[~lower]))


def _direct_log_a0(y, i, j, hp):
    d = j - i
    c = y[i:j] - hp.nu
    m, s = c.sum(), (c * c).sum()
    s2, r2 = hp.sigma**2, hp.rho**2
    return (m * m / (d + s2 / r2) - s) / (2 * s2) - d / 2 * math.log(2 * math.pi * s2) - 0.5 * math.log(1 + d * r2 / s2)


def test_incremental_matches_from_scratch(rng):
    y = rng.normal(size=200) * 1.5 + 3.0
    hp = Hyperparameters(2.5, 1.2, 0.8)
    mt = gaussian_moments(y, hp)
    for i in range(0, 200, 7):
        for j in range(i + 1, 201, 5):
            ref = _direct_log_a0(y, i, j, hp)
            assert abs(mt.log_a0[i, j] - ref) <= 1e-10 * abs(ref)


@pytest.mark.parametrize("i,j", [(0, 1), (2, 5), (0, 6)])
def test_gaussian_closed_form_against_quad(rng, i, j):
    y = rng.normal(size=6)
    hp = Hyperparameters(0.3, 0.8, 0.5)
    mt = gaussian_moments(y, hp)

    def integrand(mu, r):
        return stats.norm.pdf(mu, hp.nu, hp.rho) * np.prod(stats.norm.pdf(y[i:j], mu, hp.sigma)) * mu**r

    a = [integrate.quad(integrand, -20, 20, args=(r,), epsabs=0, epsrel=1e-12)[0] for r in range(3)]
    assert math.log(a[0]) == pytest.approx(mt.log_a0[i, j], abs=1e-10)
    assert a[1] / a[0] == pytest.approx(mt.m1[i, j], abs=1e-10)
    assert a[2] / a[0] == pytest.approx(mt.m2[i, j], abs=1e-10)


def test_gaussian_mean_is_convex_combination(rng):
    y = rng.uniform(-1, 1, size=30)
    hp = Hyperparameters(0.0, 2.0, 0.3)
    mt = gaussian_moments(y, hp)
    for i in range(30):
        for j in range(i + 1, 31):
            lo, hi = y[i:j].min(), y[i:j].max()
            if lo <= hp.nu <= hi:
                assert lo - 1e-12 <= mt.m1[i, j] <= hi + 1e-12


def test_gaussian_variance_nonnegative_before_clamp(rng):
    y = rng.normal(size=80) * 10
    mt = gaussian_moments(y, Hyperparameters(0.0, 5.0, 0.01))
    upper = np.triu(np.ones((81, 81), dtype=bool), k=1)
    assert np.min((mt.m2 - mt.m1**2)[upper]) >= -1e-12 * np.max(mt.m2[upper])


def test_large_rho_limit(rng):
    y = rng.normal(1.0, 0.5, size=50)
    mt = gaussian_moments(y, Hyperparameters(0.0, 1e6, 0.5))
    assert mt.m1[0, 50] == pytest.approx(y.mean(), rel=1e-9)
    assert math.sqrt(mt.variance()[0, 50]) == pytest.approx(0.5 / math.sqrt(50), rel=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_grid_agrees_with_closed_form(seed):
    y = np.random.default_rng(seed).normal(size=20)
    hp = estimate_moments(y)
    exact = gaussian_moments(y, hp)
    approx = grid_moments(y, hp, "gauss", "gauss")
    upper = np.triu(np.ones((21, 21), dtype=bool), k=1)
    assert np.max(np.abs(approx.log_a0[upper] - exact.log_a0[upper])) <= 1e-3
    np.testing.assert_allclose(approx.m1[upper], exact.m1[upper], rtol=1e-3)
    np.testing.assert_allclose(approx.m2[upper], exact.m2[upper], rtol=1e-3)


def test_cauchy_single_point_symmetric_and_finite():
    mt = grid_moments([0.0], UNIT, "cauchy", "cauchy")
    assert mt.m1[0, 1] == pytest.approx(0.0, abs=1e-12)
    assert np.isfinite(mt.m2[0, 1]) and mt.m2[0, 1] > 0
    assert np.isfinite(mt.log_a0[0, 1])


def test_two_point_interval_matches_direct_quadrature():
    y = np.array([0.3, -0.2, 1.1])
    hp = Hyperparameters(0.1, 0.9, 0.4)
    mt = grid_moments(y, hp, "cauchy", "cauchy")

    def integrand(mu):
        return stats.cauchy.pdf(mu, hp.nu, hp.rho) * stats.cauchy.pdf(y[1], mu, hp.sigma) * stats.cauchy.pdf(
            y[2], mu, hp.sigma)

    lo, hi = hp.nu - 25 * hp.rho, hp.nu + 25 * hp.rho
    direct = integrate.quad(integrand, lo, hi, points=[y[1], y[2]], limit=200)[0]
    assert mt.log_a0[1, 3] == pytest.approx(math.log(direct), abs=1e-4)


def test_grid_far_tail_stays_finite_in_log_space():
    # a single grid point deep in the tail of every density: no underflow
    hp = Hyperparameters(0.0, 1.0, 1e-3)
    grid = GridSpec(step=1.0, lo=40.0, hi=40.5)
    mt = grid_moments([0.0, 0.0], hp, "gauss", "gauss", grid)
    direct = -0.5 * 40.0**2 - 0.5 * math.log(2 * math.pi) + 2 * (-0.5 * (40.0 / 1e-3) ** 2 - math.log(1e-3)
                                                                  - 0.5 * math.log(2 * math.pi))
    assert mt.log_a0[0, 2] == pytest.approx(direct, rel=1e-12)
    assert mt.m1[0, 2] == 40.0


def test_gridspec():
    g = GridSpec.from_hyper(Hyperparameters(1.0, 2.0, 0.5))
    assert g.step == pytest.approx(0.05)
    assert (g.lo, g.hi) == (-49.0, 51.0)
    assert g.size == math.ceil(100 / 0.05) + 1
    assert g.points()[0] == g.lo and g.points()[-1] >= g.hi - 1e-9
    with pytest.raises(ValueError):
        GridSpec(0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        GridSpec(0.1, 1.0, 1.0)


def test_moment_tables_dispatch(rng):
    y = rng.normal(size=6)
    hp = Hyperparameters(0.0, 1.0, 0.5)
    np.testing.assert_array_equal(moment_tables(y, hp).log_a0, gaussian_moments(y, hp).log_a0)
    assert moment_tables(y, hp, "cauchy").log_a0.shape == (7, 7)


def test_series_validation():
    with pytest.raises(ValueError):
        as_series([])
    with pytest.raises(ValueError, match="index 1"):
        as_series([0.0, np.nan])
    with pytest.raises(ValueError):
        as_series([np.inf])


def test_hyperparameters_validation():
    with pytest.raises(ValueError):
        Hyperparameters(0.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Hyperparameters(0.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        Hyperparameters(np.nan, 1.0, 1.0)
    assert scale_floor([3.0, 3.0]) == 1e-12
    assert scale_floor([0.0, 2.0]) == 2e-12
