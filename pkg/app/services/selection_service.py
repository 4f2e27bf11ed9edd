"""
Per-round client selection strategies.

Every strategy returns exactly K distinct client ids, sorted ascending, and
draws only from its own (seed, purpose, round) stream.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from app.core.exceptions import ConfigurationError
from app.models.cluster_model import ClusterAssignment
from app.models.dataset_model import ClientDataset
from app.models.energy_model import FlopCounter
from app.utils.rng import stream

DRAW_FLOPS = 1  # flop-units charged per sampled id


@dataclass(frozen=True)
class SelectionContext:
    round_t: int
    K: int
    sizes: np.ndarray
    seed: int
    assignment: Optional[ClusterAssignment] = None
    d: Optional[int] = None

    def __post_init__(self):
        sizes = np.asarray(self.sizes, dtype=np.float64)
        if sizes.ndim != 1 or np.any(sizes < 0) or sizes.sum() <= 0:
            raise ConfigurationError("Client sizes must be a non-negative vector with a positive total")
        sizes.setflags(write=False)
        object.__setattr__(self, "sizes", sizes)
        if not 1 <= self.K <= self.L:
            raise ConfigurationError(f"K={self.K} must lie in [1, L={self.L}]")
        if self.assignment is not None and self.assignment.L != self.L:
            raise ConfigurationError("Assignment does not cover the same clients as sizes")

    @property
    def L(self) -> int:
        return int(self.sizes.size)

    @property
    def pi(self) -> np.ndarray:
        """Data-proportional sampling probabilities |D_j| / sum |D_k|."""
        return self.sizes / self.sizes.sum()

    def rng(self, purpose: str = "select") -> np.random.Generator:
        return stream(self.seed, purpose, self.round_t)

    def groups(self) -> List[np.ndarray]:
        if self.assignment is None:
            raise ConfigurationError("This strategy needs a cluster assignment")
        return self.assignment.groups()


def _charge(counter: Optional[FlopCounter], units: int):
    if counter is not None:
        counter.add(units * DRAW_FLOPS)


def select_random(ctx: SelectionContext, counter: Optional[FlopCounter] = None) -> List[int]:
    """K ids without replacement, each successive draw proportional to pi over the remaining pool."""
    chosen = ctx.rng().choice(ctx.L, size=ctx.K, replace=False, p=ctx.pi)
    _charge(counter, ctx.K)
    return sorted(int(j) for j in chosen)


def draw_powerd_candidates(ctx: SelectionContext, counter: Optional[FlopCounter] = None) -> List[int]:
    """d candidates drawn by pi without replacement, on the PowerD stream."""
    d = ctx.d
    if d is None or not ctx.K <= d <= ctx.L:
        raise ConfigurationError(f"PowerD needs K <= d <= L, got K={ctx.K}, d={d}, L={ctx.L}")
    chosen = ctx.rng("powerd").choice(ctx.L, size=d, replace=False, p=ctx.pi)
    _charge(counter, d)
    return sorted(int(j) for j in chosen)


def select_powerd(ctx: SelectionContext, candidates: Sequence[int], losses: Sequence[float]) -> List[int]:
    """The K candidates with the largest losses; equal losses prefer the lower id."""
    if len(candidates) != len(losses):
        raise ConfigurationError("One loss per candidate is required")
    if len(candidates) < ctx.K:
        raise ConfigurationError(f"d={len(candidates)} candidates cannot supply K={ctx.K} clients")
    ranked = sorted(zip(candidates, losses), key=lambda c: (-c[1], c[0]))
    return sorted(int(j) for j, _ in ranked[: ctx.K])


def simclust_quotas(sizes: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """
    floor(K/G) per group plus K mod G extra slots on uniformly chosen groups;
    quotas are capped at group size and any shortfall moves to the groups with
    most spare members (lowest index on ties).
    """
    G = sizes.size
    quota = np.full(G, K // G, dtype=np.int64)
    quota[rng.choice(G, size=K % G, replace=False)] += 1
    shortfall = int(np.maximum(quota - sizes, 0).sum())
    quota = np.minimum(quota, sizes)
    while shortfall:
        g = int(np.argmax(sizes - quota))
        quota[g] += 1
        shortfall -= 1
    return quota


def select_simclust(ctx: SelectionContext, counter: Optional[FlopCounter] = None) -> List[int]:
    """G >= K: one member from each of K uniformly chosen groups; otherwise quota sampling across groups."""
    groups = ctx.groups()
    G = len(groups)
    rng = ctx.rng()
    chosen: List[int] = []
    if G >= ctx.K:
        for g in rng.choice(G, size=ctx.K, replace=False):
            members = groups[int(g)]
            chosen.append(int(members[rng.integers(members.size)]))
    else:
        quota = simclust_quotas(np.array([m.size for m in groups]), ctx.K, rng)
        for members, q in zip(groups, quota):
            chosen.extend(int(j) for j in rng.choice(members, size=int(q), replace=False))
    _charge(counter, ctx.K)
    return sorted(chosen)


def select_repclust(ctx: SelectionContext, counter: Optional[FlopCounter] = None) -> List[int]:
    """
    Whole groups in uniform random order until at least K clients are gathered,
    then a uniform subset of exactly K.
    """
    groups = ctx.groups()
    rng = ctx.rng()
    gathered: List[int] = []
    for g in rng.permutation(len(groups)):
        gathered.extend(int(j) for j in groups[int(g)])
        if len(gathered) >= ctx.K:
            break
    if len(gathered) > ctx.K:
        gathered = [int(j) for j in rng.choice(gathered, size=ctx.K, replace=False)]
    _charge(counter, ctx.K)
    return sorted(gathered)


SELECTORS: Dict[str, Callable[..., List[int]]] = {
    "random": select_random,
    "simclust": select_simclust,
    "repclust": select_repclust,
}


def label_coverage(selected: Sequence[int], datasets: Sequence[ClientDataset]) -> int:
    """Distinct classes held by the selected clients."""
    if not selected:
        return 0
    counts = np.sum([datasets[j].label_counts for j in selected], axis=0)
    return int(np.count_nonzero(counts))
