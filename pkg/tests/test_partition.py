import math

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from app.models.dataset_model import ClientDataset, PartitionConfig
from app.services.partition_service import (
    draw_client_label_distributions,
    export_client_datasets,
    largest_remainder_counts,
    materialize_client_datasets,
    planted_partition,
    split_all,
    train_test_split,
)


def _datasets(cfg: PartitionConfig):
    return materialize_client_datasets(cfg, draw_client_label_distributions(cfg))


def test_two_blocks_have_disjoint_label_support():
    cfg = PartitionConfig(L=10, M=10, alpha=1.0, rho=2, samples_per_client=100, seed=3)
    dists = draw_client_label_distributions(cfg)
    datasets = materialize_client_datasets(cfg, dists)
    for j in range(5):
        assert np.all(dists[j].probs[5:] == 0)
        assert np.all(datasets[j].label_counts[5:] == 0)
    for j in range(5, 10):
        assert np.all(datasets[j].label_counts[:5] == 0)


def test_infinite_alpha_single_block_is_exactly_uniform():
    cfg = PartitionConfig(L=8, M=10, alpha="infinity", rho=1, samples_per_client=200)
    for dist in draw_client_label_distributions(cfg):
        np.testing.assert_array_equal(dist.probs, np.full(10, 0.1))


def test_infinite_alpha_empirical_distribution_close_to_uniform():
    cfg = PartitionConfig(L=8, M=10, alpha="inf", rho=1, samples_per_client=250)
    bound = 2 / math.sqrt(cfg.samples_per_client)
    for ds in _datasets(cfg):
        assert np.all(np.abs(ds.label_distribution.probs - 0.1) < bound)


def test_rho_equal_to_m_gives_one_hot_clients():
    cfg = PartitionConfig(L=8, M=4, alpha=0.5, rho=4)
    for j, dist in enumerate(draw_client_label_distributions(cfg)):
        expected = np.zeros(4)
        expected[cfg.partition_of(j)] = 1.0
        np.testing.assert_array_equal(dist.probs, expected)


def test_full_support_is_possible_with_one_block():
    cfg = PartitionConfig(L=4, M=5, alpha=5.0, rho=1)
    for dist in draw_client_label_distributions(cfg):
        assert dist.support.size == 5


@pytest.mark.parametrize("rho", [1, 2, 5])
def test_classes_per_client_bounded_by_block_width(rho):
    cfg = PartitionConfig(L=10, M=10, alpha=1.0, rho=rho, samples_per_client=200, seed=1)
    for ds in _datasets(cfg):
        assert np.count_nonzero(ds.label_counts) <= 10 // rho


def test_planted_partition_is_contiguous_blocks():
    cfg = PartitionConfig(L=6, M=6, rho=3)
    np.testing.assert_array_equal(planted_partition(cfg), [0, 0, 1, 1, 2, 2])


def test_largest_remainder_examples():
    np.testing.assert_array_equal(largest_remainder_counts(np.array([0.5, 0.5]), 10), [5, 5])
    counts = largest_remainder_counts(np.array([0.33, 0.33, 0.34]), 10)
    assert counts.sum() == 10
    assert np.max(np.abs(counts - 10 * np.array([0.33, 0.33, 0.34]))) <= 1
    np.testing.assert_array_equal(counts, [3, 3, 4])


def test_largest_remainder_never_fills_zero_classes():
    counts = largest_remainder_counts(np.array([1 / 3, 0.0, 2 / 3]), 7)
    assert counts[1] == 0
    assert counts.sum() == 7


def test_label_counts_sum_to_samples_per_client():
    cfg = PartitionConfig(L=6, M=10, alpha=0.3, rho=2, samples_per_client=37)
    for ds in _datasets(cfg):
        assert ds.label_counts.sum() == ds.n_samples == 37
        assert abs(ds.label_distribution.probs.sum() - 1) <= 1e-9


def test_same_seed_is_bitwise_identical():
    cfg = PartitionConfig(L=4, M=6, alpha=1.0, rho=2, samples_per_client=30, seed=11)
    a, b = _datasets(cfg), _datasets(cfg)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.features, y.features)
        np.testing.assert_array_equal(x.labels, y.labels)


def test_different_seed_changes_data():
    base = PartitionConfig(L=4, M=6, alpha=1.0, rho=2, samples_per_client=30, seed=1)
    other = base.model_copy(update={"seed": 2})
    assert not np.array_equal(_datasets(base)[0].features, _datasets(other)[0].features)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"M": 10, "rho": 3},
        {"L": 2, "M": 4, "rho": 4},
        {"L": 5, "M": 10, "rho": 2},
        {"alpha": 0.0},
        {"alpha": -1.0},
    ],
)
def test_invalid_partition_configs(kwargs):
    with pytest.raises(ValidationError):
        PartitionConfig(**kwargs)


def test_alpha_sentinel_round_trips():
    cfg = PartitionConfig(alpha="Infinity")
    assert cfg.homogeneous
    assert cfg.model_dump()["alpha"] == "infinity"
    assert PartitionConfig.model_validate(cfg.model_dump()).homogeneous


def _indexed_dataset(labels):
    labels = np.asarray(labels)
    features = np.arange(labels.size, dtype=float).reshape(-1, 1)
    return ClientDataset(client_id=0, features=features, labels=labels, M=int(labels.max()) + 1)


def test_split_ratio_on_ten_samples():
    train, test = train_test_split(_indexed_dataset([0] * 5 + [1] * 5), 0.7, seed=0)
    assert (train.n_samples, test.n_samples) == (7, 3)


def test_split_half_is_stratified():
    train, test = train_test_split(_indexed_dataset([0] * 4 + [1] * 4), 0.5, seed=0)
    np.testing.assert_array_equal(train.label_counts, [2, 2])
    np.testing.assert_array_equal(test.label_counts, [2, 2])


def test_split_is_disjoint_and_complete():
    ds = _indexed_dataset([0, 1, 2] * 7)
    train, test = train_test_split(ds, 0.7, seed=5)
    ids_train, ids_test = set(train.features[:, 0]), set(test.features[:, 0])
    assert ids_train.isdisjoint(ids_test)
    assert ids_train | ids_test == set(ds.features[:, 0])


def test_singleton_class_stays_in_train():
    train, test = train_test_split(_indexed_dataset([0] * 6 + [1]), 0.5, seed=0)
    assert train.label_counts[1] == 1
    assert test.label_counts[1] == 0


def test_split_rejects_bad_ratio():
    with pytest.raises(ValueError):
        train_test_split(_indexed_dataset([0, 1]), 1.0, seed=0)


def test_global_test_set_is_union_of_client_shards():
    cfg = PartitionConfig(L=4, M=4, rho=2, samples_per_client=20)
    train, test, global_test = split_all(_datasets(cfg), 0.7, seed=0)
    assert global_test.n_samples == sum(t.n_samples for t in test)
    assert sum(t.n_samples for t in train) + global_test.n_samples == 80


def test_export_client_datasets(tmp_path):
    cfg = PartitionConfig(L=2, M=4, rho=2, samples_per_client=5, feature_dim=3)
    path = export_client_datasets(_datasets(cfg), tmp_path / "clients.csv")
    df = pd.read_csv(path)
    assert list(df.columns) == ["client_id", "label", "feature_0", "feature_1", "feature_2"]
    assert len(df) == 10
