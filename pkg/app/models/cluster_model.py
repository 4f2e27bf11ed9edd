from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from app.core.exceptions import ClusteringError


@dataclass(frozen=True)
class ClusterAssignment:
    """
    Partition of client ids 0..L-1 into G non-empty groups.

    `trace` optionally records the optimiser's objective after each
    iteration (k-means inertia or the diversity scalar).
    """
    assignment: np.ndarray
    G: int
    trace: Tuple[float, ...] = field(default=(), compare=False)
    iterations: int = field(default=0, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.assignment, dtype=np.int64)
        if arr.ndim != 1:
            raise ClusteringError(f"Assignment must be 1-D, got shape {arr.shape}")
        if self.G < 1:
            raise ClusteringError(f"G must be >= 1, got {self.G}")
        if arr.size and (arr.min() < 0 or arr.max() >= self.G):
            raise ClusteringError(f"Group ids must lie in [0, {self.G})")
        if np.unique(arr).size != self.G:
            raise ClusteringError("Every group must be non-empty")
        arr.setflags(write=False)
        object.__setattr__(self, "assignment", arr)

    @property
    def L(self) -> int:
        return int(self.assignment.size)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.G)

    def groups(self) -> List[np.ndarray]:
        """Members of each group in ascending client id order."""
        return [np.flatnonzero(self.assignment == g) for g in range(self.G)]

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[int]], **kwargs) -> "ClusterAssignment":
        L = sum(len(g) for g in groups)
        arr = np.full(L, -1, dtype=np.int64)
        for g, members in enumerate(groups):
            arr[np.asarray(members, dtype=np.int64)] = g
        return cls(arr, len(groups), **kwargs)

    def __eq__(self, other) -> bool:
        return isinstance(other, ClusterAssignment) and self.G == other.G and np.array_equal(self.assignment, other.assignment)

    def __hash__(self) -> int:
        return hash((self.G, self.assignment.tobytes()))


@dataclass(frozen=True)
class DiversityObjective:
    """
    Two-objective grouping score in nats: `intra` (mean within-group pairwise
    divergence, to maximise) and `inter` (mean divergence between group means,
    to minimise), combined as scalar = intra - lambda * inter.
    """
    intra: float
    inter: float
    lam: float

    @property
    def scalar(self) -> float:
        return self.intra - self.lam * self.inter
