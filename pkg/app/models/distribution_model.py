from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.core.exceptions import InvalidDistributionError

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class LabelDistribution:
    """
    A point on the M-class probability simplex (a client's label proportions).
    """
    probs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidDistributionError(f"Expected a 1-D vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidDistributionError("Distribution has non-finite entries")
        if np.any(arr < 0):
            raise InvalidDistributionError(f"Negative probability in {arr.tolist()}")
        total = float(arr.sum())
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise InvalidDistributionError(f"Probabilities sum to {total!r}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def M(self) -> int:
        return int(self.probs.size)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "LabelDistribution":
        counts = np.asarray(counts, dtype=np.float64)
        n = counts.sum()
        if n <= 0:
            raise InvalidDistributionError("Cannot normalise an all-zero count vector")
        return cls(counts / n)

    @classmethod
    def uniform(cls, M: int) -> "LabelDistribution":
        return cls(np.full(M, 1.0 / M))

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelDistribution) and np.array_equal(self.probs, other.probs)

    def __hash__(self) -> int:
        return hash(self.probs.tobytes())


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric n×n matrix of pairwise divergences (nats) with a zero diagonal."""
    d: np.ndarray

    def __post_init__(self):
        arr = np.array(self.d, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidDistributionError(f"Distance matrix must be square, got {arr.shape}")
        if np.any(np.diag(arr) != 0):
            raise InvalidDistributionError("Distance matrix diagonal must be zero")
        if not np.array_equal(arr, arr.T):
            raise InvalidDistributionError("Distance matrix must be symmetric")
        if np.any(arr < 0):
            raise InvalidDistributionError("Distance matrix has negative entries")
        arr.setflags(write=False)
        object.__setattr__(self, "d", arr)

    @property
    def n(self) -> int:
        return int(self.d.shape[0])

    def __getitem__(self, key):
        return self.d[key]
