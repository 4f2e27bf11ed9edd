"""
Local Gaussian DP on label distributions.

Each client adds N(0, sigma^2) noise to its own distribution before sending it
to the server; the server clamps and renormalises the noisy vector so the
clustering code only ever sees valid simplex points.
"""

from typing import List, Sequence

import numpy as np

from app.core.exceptions import ConfigurationError
from app.models.distribution_model import LabelDistribution
from app.services.distribution_service import EPS_FLOOR
from app.utils.rng import stream


def dp_sigma(gamma: float, M: int, dists: Sequence[LabelDistribution]) -> float:
    """sigma = gamma / (M L) * sum_j ||p_j||_1, which is gamma / M for valid distributions."""
    if gamma < 0:
        raise ConfigurationError(f"gamma must be >= 0, got {gamma}")
    if not dists:
        raise ConfigurationError("dp_sigma needs at least one distribution")
    l1 = sum(float(np.abs(d.probs).sum()) for d in dists)
    return gamma / (M * len(dists)) * l1


def perturb(dist: LabelDistribution, sigma: float, seed: int, index: int = 0) -> np.ndarray:
    """Raw noisy vector p + eps, eps ~ N(0, sigma^2 I); may leave the simplex."""
    if sigma < 0:
        raise ConfigurationError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return dist.probs.copy()
    rng = stream(seed, "dp", index)
    return dist.probs + rng.normal(0.0, sigma, size=dist.M)


def sanitize(raw: np.ndarray) -> LabelDistribution:
    """Clamp below EPS_FLOOR and renormalise; an all non-positive vector becomes uniform."""
    raw = np.asarray(raw, dtype=np.float64)
    if not np.any(raw > 0):
        return LabelDistribution.uniform(raw.size)
    clamped = np.maximum(raw, EPS_FLOOR)
    return LabelDistribution(clamped / clamped.sum())


def privatize_distributions(dists: Sequence[LabelDistribution], gamma: float, seed: int) -> List[LabelDistribution]:
    """What the server receives when every client applies the mechanism; gamma = 0 returns the inputs."""
    if gamma == 0:
        return list(dists)
    sigma = dp_sigma(gamma, dists[0].M, dists)
    return [sanitize(perturb(d, sigma, seed, j)) for j, d in enumerate(dists)]
