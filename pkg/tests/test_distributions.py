import math

import numpy as np
import pytest

from app.core.exceptions import ConfigurationError, DimensionMismatchError, InvalidDistributionError
from app.models.distribution_model import DistanceMatrix, LabelDistribution
from app.models.energy_model import FlopCounter
from app.services.distribution_service import (
    EPS_FLOOR,
    KL_FLOPS_PER_CLASS,
    empirical_distributions,
    mean_distribution,
    pairwise_distances,
    symmetrized_kl,
)
from tests.conftest import random_simplex


def test_identical_distributions_have_zero_divergence():
    p = LabelDistribution([0.3, 0.7])
    assert symmetrized_kl(p, p) == 0.0


def test_mirrored_pair_gives_ln3():
    p = LabelDistribution([0.75, 0.25])
    q = LabelDistribution([0.25, 0.75])
    assert symmetrized_kl(p, q) == pytest.approx(math.log(3), rel=1e-12)


def test_zero_entry_is_floored_to_a_finite_value():
    p = LabelDistribution([1.0, 0.0])
    q = LabelDistribution([0.5, 0.5])
    pf = np.array([1.0, EPS_FLOOR]) / (1.0 + EPS_FLOOR)
    expected = float(np.sum((pf - 0.5) * np.log(pf / 0.5)))
    value = symmetrized_kl(p, q)
    assert math.isfinite(value)
    assert value == pytest.approx(expected, rel=1e-9)


def test_symmetry_on_random_pairs(rng):
    for _ in range(200):
        p, q = random_simplex(rng, 6, 2)
        assert symmetrized_kl(p, q) == symmetrized_kl(q, p)
        assert symmetrized_kl(p, q) >= 0


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionMismatchError):
        symmetrized_kl(LabelDistribution([0.5, 0.5]), LabelDistribution([0.2, 0.3, 0.5]))


@pytest.mark.parametrize("probs", [[0.5, 0.6], [-0.1, 1.1], [np.nan, 1.0], [[0.5, 0.5]]])
def test_invalid_simplex_points_are_rejected(probs):
    with pytest.raises(InvalidDistributionError):
        LabelDistribution(probs)


def test_divergence_is_charged_to_counter():
    counter = FlopCounter()
    symmetrized_kl(LabelDistribution([0.2, 0.8]), LabelDistribution([0.6, 0.4]), counter)
    assert counter.divergences == 1
    assert counter.flops == KL_FLOPS_PER_CLASS * 2


@pytest.mark.parametrize(
    "members, expected",
    [
        ([[1, 0], [0, 1]], [0.5, 0.5]),
        ([[0.2, 0.8]], [0.2, 0.8]),
        ([[0.1, 0.9], [0.3, 0.7], [0.5, 0.5]], [0.3, 0.7]),
    ],
)
def test_mean_distribution(members, expected):
    mean = mean_distribution([LabelDistribution(m) for m in members])
    np.testing.assert_allclose(mean.probs, expected, atol=1e-12)
    assert abs(mean.probs.sum() - 1.0) <= 1e-9


def test_mean_distribution_rejects_empty():
    with pytest.raises(ConfigurationError):
        mean_distribution([])


def test_pairwise_distances_of_identical_pair_is_zero():
    p = LabelDistribution([0.4, 0.6])
    D = pairwise_distances([p, p])
    np.testing.assert_array_equal(D.d, np.zeros((2, 2)))


def test_pairwise_distances_match_elementwise_calls(rng):
    dists = random_simplex(rng, 5, 7)
    counter = FlopCounter()
    D = pairwise_distances(dists, counter)
    for i in range(7):
        for j in range(7):
            expected = 0.0 if i == j else symmetrized_kl(dists[i], dists[j])
            assert D[i, j] == expected
    assert counter.divergences == 7 * 6 // 2


def test_pairwise_distances_needs_two_inputs():
    with pytest.raises(ConfigurationError):
        pairwise_distances([LabelDistribution([1.0])])


def test_distance_matrix_validation():
    with pytest.raises(InvalidDistributionError):
        DistanceMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(InvalidDistributionError):
        DistanceMatrix(np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_empirical_distributions_normalise_counts():
    dists = empirical_distributions([np.array([1, 3]), np.array([5, 0])])
    np.testing.assert_allclose(dists[0].probs, [0.25, 0.75])
    np.testing.assert_allclose(dists[1].probs, [1.0, 0.0])
