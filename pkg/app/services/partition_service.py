"""
Synthetic non-iid client data under the (alpha, rho)-Dir scheme.

Clients are split into rho contiguous equal blocks; block r only holds the
M/rho classes of partition r. Features are Gaussian blobs around per-class
axis-aligned means.
"""

from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.exceptions import ConfigurationError, DimensionMismatchError
from app.core.logger import logger
from app.models.dataset_model import ClientDataset, PartitionConfig
from app.models.distribution_model import LabelDistribution
from app.utils.file_handler import save_dataframe
from app.utils.rng import stream


def partition_classes(cfg: PartitionConfig, r: int) -> np.ndarray:
    width = cfg.classes_per_partition
    return np.arange(r * width, (r + 1) * width)


def planted_partition(cfg: PartitionConfig) -> np.ndarray:
    """Block id of every client; the ground-truth grouping of the scheme."""
    return np.array([cfg.partition_of(j) for j in range(cfg.L)], dtype=np.int64)


def draw_client_label_distributions(cfg: PartitionConfig) -> List[LabelDistribution]:
    rng = stream(cfg.seed, "labels")
    width = cfg.classes_per_partition
    dists = []
    for j in range(cfg.L):
        support = partition_classes(cfg, cfg.partition_of(j))
        probs = np.zeros(cfg.M)
        if width == 1:
            probs[support] = 1.0
        elif cfg.homogeneous:
            probs[support] = 1.0 / width
        else:
            ratios = rng.dirichlet(np.full(width, cfg.alpha))
            probs[support] = ratios / ratios.sum()
        dists.append(LabelDistribution(probs))
    return dists


def largest_remainder_counts(probs: np.ndarray, n: int) -> np.ndarray:
    """
    Integer counts summing exactly to n; leftover units go to the largest
    fractional parts, ties to the lowest class index.
    """
    probs = np.asarray(probs, dtype=np.float64)
    raw = n * probs
    base = np.floor(raw).astype(np.int64)
    remainder = int(n - base.sum())
    if remainder > 0:
        # zero-probability classes never receive a leftover unit
        frac = np.where(probs > 0, raw - base, -1.0)
        order = np.argsort(-frac, kind="stable")
        base[order[:remainder]] += 1
    elif remainder < 0:
        # only reachable through float noise when probs sum to slightly above 1
        order = np.argsort(raw - base, kind="stable")
        for idx in order:
            if remainder == 0:
                break
            if base[idx] > 0:
                base[idx] -= 1
                remainder += 1
    return base


def class_means(cfg: PartitionConfig) -> np.ndarray:
    """Axis-aligned class means; axes are reused at growing multiples when M > feature_dim."""
    means = np.zeros((cfg.M, cfg.feature_dim))
    for m in range(cfg.M):
        means[m, m % cfg.feature_dim] = cfg.class_separation * (1 + m // cfg.feature_dim)
    return means


def materialize_client_datasets(cfg: PartitionConfig, dists: Sequence[LabelDistribution]) -> List[ClientDataset]:
    if len(dists) != cfg.L:
        raise DimensionMismatchError(f"Expected {cfg.L} distributions, got {len(dists)}")
    means = class_means(cfg)
    datasets = []
    for j, dist in enumerate(dists):
        if dist.M != cfg.M:
            raise DimensionMismatchError(f"Client {j}: distribution has {dist.M} classes, config has {cfg.M}")
        rng = stream(cfg.seed, "features", j)
        counts = largest_remainder_counts(dist.probs, cfg.samples_per_client)
        labels = np.repeat(np.arange(cfg.M), counts)
        labels = labels[rng.permutation(labels.size)]
        features = means[labels] + rng.standard_normal((labels.size, cfg.feature_dim))
        datasets.append(ClientDataset(client_id=j, features=features, labels=labels, M=cfg.M))

    per_client = [int(np.count_nonzero(ds.label_counts)) for ds in datasets]
    logger.info(
        "Materialized client datasets",
        extra={"clients": cfg.L, "rho": cfg.rho, "alpha": str(cfg.alpha), "mean_classes_per_client": float(np.mean(per_client))},
    )
    return datasets


def _train_counts(counts: np.ndarray, ratio: float) -> np.ndarray:
    """
    Per-class train counts: each eligible class (>= 2 samples) keeps at least one
    sample on each side, and the eligible total is round-half-up(ratio * n).
    """
    eligible = counts >= 2
    raw = ratio * counts.astype(np.float64)
    train = np.where(eligible, np.clip(np.floor(raw), 1, counts - 1), counts).astype(np.int64)
    target = int(np.floor(ratio * counts[eligible].sum() + 0.5))
    diff = target - int(train[eligible].sum())
    frac = raw - np.floor(raw)
    if diff > 0:
        for idx in np.argsort(-frac, kind="stable"):
            if diff == 0:
                break
            if eligible[idx] and train[idx] < counts[idx] - 1:
                train[idx] += 1
                diff -= 1
    elif diff < 0:
        for idx in np.argsort(frac, kind="stable"):
            if diff == 0:
                break
            if eligible[idx] and train[idx] > 1:
                train[idx] -= 1
                diff += 1
    return train


def train_test_split(ds: ClientDataset, ratio: float, seed: int) -> Tuple[ClientDataset, ClientDataset]:
    """
    Stratified-by-label split. A class shard with fewer than 2 samples goes
    entirely to train (logged as a warning).
    """
    if not 0 < ratio < 1:
        raise ConfigurationError(f"Split ratio must be in (0, 1), got {ratio}")
    rng = stream(seed, "split", ds.client_id)
    counts = ds.label_counts
    small = [int(m) for m in np.flatnonzero((counts > 0) & (counts < 2))]
    if small:
        logger.warning(f"Client {ds.client_id}: classes {small} have < 2 samples, kept in train")

    train_counts = _train_counts(counts, ratio)
    train_idx, test_idx = [], []
    for m in np.flatnonzero(counts):
        idx = np.flatnonzero(ds.labels == m)
        idx = idx[rng.permutation(idx.size)]
        train_idx.append(idx[: train_counts[m]])
        test_idx.append(idx[train_counts[m]:])
    train_idx = np.sort(np.concatenate(train_idx)) if train_idx else np.array([], dtype=np.int64)
    test_idx = np.sort(np.concatenate(test_idx)) if test_idx else np.array([], dtype=np.int64)

    def _subset(idx):
        return ClientDataset(client_id=ds.client_id, features=ds.features[idx], labels=ds.labels[idx], M=ds.M)

    return _subset(train_idx), _subset(test_idx)


def split_all(datasets: Sequence[ClientDataset], ratio: float, seed: int):
    """Split every client and build the global test set from the test shards."""
    splits = [train_test_split(ds, ratio, seed) for ds in datasets]
    train = [s[0] for s in splits]
    test = [s[1] for s in splits]
    return train, test, ClientDataset.concat(test)


def export_client_datasets(datasets: Sequence[ClientDataset], file_path: Path) -> Path:
    """CSV layout: client_id, label, feature_0..feature_{d-1}."""
    frames = []
    for ds in datasets:
        df = pd.DataFrame(ds.features, columns=[f"feature_{i}" for i in range(ds.features.shape[1])])
        df.insert(0, "label", ds.labels)
        df.insert(0, "client_id", ds.client_id)
        frames.append(df)
    return save_dataframe(pd.concat(frames, ignore_index=True), file_path)
