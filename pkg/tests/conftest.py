import numpy as np
import pytest

from bpcr.synthgen import GroundTruth, generate


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def steps_series():
    """A noisy three-level series of length 40 (fixed draw)."""
    truth = GroundTruth((0.0, 2.0, 0.5), (0, 12, 25, 40), "gauss", 0.2, seed=7)
    y, _ = generate(truth)
    return y


def assert_normalized(res):
    np.testing.assert_allclose(res.ck.sum(), 1.0, atol=1e-9)
    np.testing.assert_allclose(res.boundary_posterior.sum(axis=1), 1.0, atol=1e-6)
    np.testing.assert_allclose(res.curve_mass, 1.0, atol=1e-6)
    assert np.all(res.curve_std >= 0)
