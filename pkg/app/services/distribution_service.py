"""
Divergences and summaries over label distributions.

The symmetrized KL used here is the Jeffreys sum KL(p||q) + KL(q||p),
evaluated after flooring every entry at EPS_FLOOR and renormalising.
"""

from typing import List, Optional, Sequence

import numpy as np
from scipy.special import rel_entr

from app.core.exceptions import ConfigurationError, DimensionMismatchError
from app.models.distribution_model import DistanceMatrix, LabelDistribution
from app.models.energy_model import FlopCounter

EPS_FLOOR = 1e-12
KL_FLOPS_PER_CLASS = 10  # flop-units charged per class for one symmetrized_kl


def floor_and_renormalize(probs: np.ndarray) -> np.ndarray:
    floored = np.maximum(np.asarray(probs, dtype=np.float64), EPS_FLOOR)
    return floored / floored.sum()


def symmetrized_kl(p: LabelDistribution, q: LabelDistribution, counter: Optional[FlopCounter] = None) -> float:
    """
    KL(p||q) + KL(q||p) in nats on floored inputs. Symmetric, >= 0, and 0 iff p == q after flooring.
    """
    if p.M != q.M:
        raise DimensionMismatchError(f"Class counts differ: {p.M} vs {q.M}")
    pf = floor_and_renormalize(p.probs)
    qf = floor_and_renormalize(q.probs)
    forward = float(np.sum(rel_entr(pf, qf)))
    backward = float(np.sum(rel_entr(qf, pf)))
    if counter is not None:
        counter.add_divergence(KL_FLOPS_PER_CLASS * p.M)
    return max(0.0, forward + backward)


def mean_distribution(members: Sequence[LabelDistribution]) -> LabelDistribution:
    """Elementwise mean of the members, i.e. the label distribution of a group."""
    if not members:
        raise ConfigurationError("mean_distribution needs at least one member")
    M = members[0].M
    if any(m.M != M for m in members):
        raise DimensionMismatchError("All members must share the same class count")
    mean = np.stack([m.probs for m in members]).mean(axis=0)
    return LabelDistribution(mean / mean.sum())


def pairwise_distances(dists: Sequence[LabelDistribution], counter: Optional[FlopCounter] = None) -> DistanceMatrix:
    """
    Full symmetric matrix of symmetrized_kl values; charges n(n-1)/2 evaluations.
    """
    n = len(dists)
    if n < 2:
        raise ConfigurationError(f"pairwise_distances needs at least 2 distributions, got {n}")
    d = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = symmetrized_kl(dists[i], dists[j], counter)
    return DistanceMatrix(d)


def empirical_distributions(label_counts: Sequence[np.ndarray]) -> List[LabelDistribution]:
    return [LabelDistribution.from_counts(c) for c in label_counts]
