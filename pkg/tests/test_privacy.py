import math

import numpy as np
import pytest

from app.core.exceptions import ConfigurationError
from app.models.distribution_model import SIMPLEX_TOL, LabelDistribution
from app.models.run_model import DpSweepConfig
from app.services.clustering_service import simclust
from app.services.distribution_service import EPS_FLOOR
from app.services.experiment_service import dp_ari_sweep
from app.services.privacy_service import dp_sigma, perturb, privatize_distributions, sanitize
from tests.conftest import random_simplex


@pytest.mark.parametrize("gamma, M, expected", [(1.0, 10, 0.1), (0.0, 10, 0.0), (2.0, 4, 0.5)])
def test_dp_sigma_examples(gamma, M, expected, rng):
    assert dp_sigma(gamma, M, random_simplex(rng, M, 7)) == pytest.approx(expected, rel=1e-12)


def test_dp_sigma_rejects_negative_gamma(rng):
    with pytest.raises(ConfigurationError):
        dp_sigma(-1.0, 3, random_simplex(rng, 3, 2))


def test_zero_sigma_returns_input_exactly():
    p = LabelDistribution([0.1, 0.2, 0.7])
    out = perturb(p, 0.0, seed=3)
    np.testing.assert_array_equal(out, p.probs)
    out[0] = 5.0
    assert p.probs[0] == 0.1


def test_noise_moments_match_sigma():
    M, sigma = 100_000, 0.2
    p = LabelDistribution.uniform(M)
    noise = perturb(p, sigma, seed=11) - p.probs
    assert abs(noise.std() - sigma) <= 0.02 * sigma
    assert abs(noise.mean()) <= 3 * sigma / math.sqrt(M)


def test_perturb_is_deterministic_per_seed_and_index():
    p = LabelDistribution([0.25, 0.25, 0.5])
    np.testing.assert_array_equal(perturb(p, 0.3, 1, 2), perturb(p, 0.3, 1, 2))
    assert not np.array_equal(perturb(p, 0.3, 1, 2), perturb(p, 0.3, 1, 3))


def test_sanitize_examples():
    np.testing.assert_array_equal(sanitize(np.array([0.5, 0.5])).probs, [0.5, 0.5])

    raw = np.array([0.8, EPS_FLOOR, 0.3])
    np.testing.assert_allclose(sanitize(np.array([0.8, -0.1, 0.3])).probs, raw / raw.sum(), rtol=1e-12)

    np.testing.assert_array_equal(sanitize(np.array([-1.0, -1.0])).probs, [0.5, 0.5])


def test_sanitized_noise_is_always_a_valid_distribution(rng):
    for dist in random_simplex(rng, 6, 50):
        for sigma in (0.01, 0.5, 5.0):
            out = sanitize(perturb(dist, sigma, seed=int(rng.integers(1000))))
            assert np.all(out.probs > 0)
            assert abs(out.probs.sum() - 1) <= SIMPLEX_TOL


def test_zero_gamma_leaves_clustering_bitwise_unchanged(rng):
    dists = random_simplex(rng, 4, 12)
    noisy = privatize_distributions(dists, 0.0, seed=5)
    assert noisy == dists
    assert simclust(noisy, 3, seed=5) == simclust(dists, 3, seed=5)


def test_positive_gamma_changes_every_client(rng):
    dists = random_simplex(rng, 4, 5)
    noisy = privatize_distributions(dists, 1.0, seed=5)
    assert all(a != b for a, b in zip(dists, noisy))


@pytest.mark.slow
def test_simclust_ari_degrades_with_noise():
    dp = DpSweepConfig()
    df = dp_ari_sweep(dp)
    assert set(df["method"]) == {"simclust", "repclust"}
    assert len(df) == 2 * len(dp.gammas) * len(dp.seeds)

    sim = df[df["method"] == "simclust"].groupby("gamma")["ari"].mean().reindex(dp.gammas)
    assert sim.iloc[0] == 1.0
    for before, after in zip(sim.iloc[:-1], sim.iloc[1:]):
        assert after <= before + 0.05

    rep = df[df["method"] == "repclust"].groupby("gamma")["ari"].mean()
    assert rep.loc[0.0] == 1.0
    assert np.isfinite(rep.loc[max(dp.gammas)])
