"""
Client grouping on label distributions.

- simclust: Lloyd-style k-means under symmetrized KL (similar clients together).
- repclust: swap heuristic for the maximally diverse equal-size grouping
  (each group mixes dissimilar clients; group means look alike).
- brute_force_diverse_grouping: exact oracle for tiny instances.
- adjusted_rand_index: chance-corrected agreement of two partitions.

Every divergence evaluation is charged to the caller's FlopCounter.
"""

import math
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.special import comb

from app.core.config import settings
from app.core.exceptions import ClusteringError, ConfigurationError, DimensionMismatchError, InstanceTooLargeError
from app.core.logger import logger
from app.models.cluster_model import ClusterAssignment, DiversityObjective
from app.models.distribution_model import DistanceMatrix, LabelDistribution
from app.models.energy_model import FlopCounter
from app.services.distribution_service import mean_distribution, pairwise_distances, symmetrized_kl
from app.utils.file_handler import save_dataframe
from app.utils.rng import stream

DEFAULT_MAX_ITERS = 100


# -------------------------------------------------------------------
# Similarity clustering
# -------------------------------------------------------------------
def _farthest_point_init(
    dists: Sequence[LabelDistribution], G: int, rng: np.random.Generator, counter: Optional[FlopCounter]
) -> List[LabelDistribution]:
    L = len(dists)
    first = int(rng.integers(L))
    chosen = [first]
    nearest = np.array([symmetrized_kl(p, dists[first], counter) for p in dists])
    while len(chosen) < G:
        score = nearest.copy()
        score[chosen] = -np.inf
        nxt = int(np.argmax(score))
        chosen.append(nxt)
        nearest = np.minimum(nearest, [symmetrized_kl(p, dists[nxt], counter) for p in dists])
    return [dists[i] for i in chosen]


def _repair_empty(assign: np.ndarray, dmat: np.ndarray, G: int) -> np.ndarray:
    """Give every empty cluster the point farthest from its own centroid (from clusters of size > 1)."""
    assign = assign.copy()
    while True:
        sizes = np.bincount(assign, minlength=G)
        empty = np.flatnonzero(sizes == 0)
        if empty.size == 0:
            return assign
        own = dmat[np.arange(assign.size), assign]
        own = np.where(sizes[assign] > 1, own, -np.inf)
        steal = int(np.argmax(own))
        assign[steal] = int(empty[0])


def simclust(
    dists: Sequence[LabelDistribution],
    G: int,
    seed: int,
    max_iters: int = DEFAULT_MAX_ITERS,
    counter: Optional[FlopCounter] = None,
) -> ClusterAssignment:
    """
    k-means with symmetrized KL assignment and arithmetic-mean centroids.
    Stops when assignments repeat, after max_iters iterations, or when an
    iteration would raise the total within-cluster divergence; in that case
    the previous assignment is kept and the trace stays non-increasing.
    """
    L = len(dists)
    if G > L:
        raise ClusteringError(f"G={G} exceeds the number of clients L={L}")
    if G < 2:
        raise ClusteringError(f"simclust needs G >= 2, got {G}")

    rng = stream(seed, "simclust")
    centroids = _farthest_point_init(dists, G, rng, counter)
    prev = None
    inertia: List[float] = []
    it = 0
    for it in range(1, max_iters + 1):
        dmat = np.array([[symmetrized_kl(p, c, counter) for c in centroids] for p in dists])
        assign = _repair_empty(np.argmin(dmat, axis=1), dmat, G)
        total = float(dmat[np.arange(L), assign].sum())
        # the member mean does not minimise symmetrized KL, so a step can overshoot
        if inertia and total > inertia[-1]:
            break
        inertia.append(total)
        if prev is not None and np.array_equal(assign, prev):
            break
        prev = assign
        centroids = [mean_distribution([dists[i] for i in np.flatnonzero(assign == g)]) for g in range(G)]

    logger.info(
        "SimClust finished",
        extra={"clients": L, "groups": G, "iterations": it, "flops": counter.flops if counter else None},
    )
    return ClusterAssignment(prev if prev is not None else assign, G, trace=tuple(inertia), iterations=it)


# -------------------------------------------------------------------
# Diverse grouping objective
# -------------------------------------------------------------------
def _group_intra(members: np.ndarray, D: DistanceMatrix) -> float:
    s = members.size
    if s < 2:
        return 0.0
    return float(D.d[np.ix_(members, members)].sum() / (s * (s - 1)))


def _combine(intra: np.ndarray, inter: np.ndarray, lam: float) -> DiversityObjective:
    G = intra.size
    mean_intra = float(intra.sum() / G)
    pairs = G * (G - 1) / 2
    mean_inter = float(np.triu(inter, 1).sum() / pairs) if pairs else 0.0
    return DiversityObjective(intra=mean_intra, inter=mean_inter, lam=lam)


def _inter_matrix(means: Sequence[LabelDistribution], counter: Optional[FlopCounter]) -> np.ndarray:
    G = len(means)
    inter = np.zeros((G, G))
    for g in range(G):
        for h in range(g + 1, G):
            inter[g, h] = inter[h, g] = symmetrized_kl(means[g], means[h], counter)
    return inter


def diversity_objective(
    assignment: ClusterAssignment,
    D: DistanceMatrix,
    dists: Sequence[LabelDistribution],
    lam: float = 1.0,
    counter: Optional[FlopCounter] = None,
) -> DiversityObjective:
    """
    intra: mean over groups of the mean ordered-pair divergence inside the group
    (singletons count 0); inter: mean divergence over unordered pairs of group means.
    """
    if assignment.L != D.n or D.n != len(dists):
        raise DimensionMismatchError("Assignment, distance matrix and distributions disagree on L")
    groups = assignment.groups()
    intra = np.array([_group_intra(m, D) for m in groups])
    means = [mean_distribution([dists[i] for i in m]) for m in groups]
    return _combine(intra, _inter_matrix(means, counter), lam)


class _DiversityState:
    """Incremental evaluator: a swap only touches two groups' intra terms and their inter rows."""

    def __init__(self, groups: List[np.ndarray], D: DistanceMatrix, dists, lam: float, counter):
        self.groups = [np.sort(g) for g in groups]
        self.D = D
        self.dists = dists
        self.lam = lam
        self.counter = counter
        self.intra = np.array([_group_intra(g, D) for g in self.groups])
        self.means = [self._mean(g) for g in self.groups]
        self.inter = _inter_matrix(self.means, counter)
        self.value = _combine(self.intra, self.inter, lam).scalar

    def _mean(self, members: np.ndarray) -> LabelDistribution:
        return mean_distribution([self.dists[i] for i in members])

    def propose_swap(self, k: int, l: int, i_k: int, i_l: int):
        gk = np.sort(np.where(self.groups[k] == i_k, i_l, self.groups[k]))
        gl = np.sort(np.where(self.groups[l] == i_l, i_k, self.groups[l]))
        intra = self.intra.copy()
        intra[k], intra[l] = _group_intra(gk, self.D), _group_intra(gl, self.D)
        means = list(self.means)
        means[k], means[l] = self._mean(gk), self._mean(gl)
        inter = self.inter.copy()
        for g in (k, l):
            for h in range(len(means)):
                if h != g:
                    a, b = min(g, h), max(g, h)
                    inter[a, b] = inter[b, a] = symmetrized_kl(means[a], means[b], self.counter)
        value = _combine(intra, inter, self.lam).scalar
        return value, (k, l, gk, gl, intra, means, inter)

    def commit(self, value: float, proposal) -> None:
        k, l, gk, gl, intra, means, inter = proposal
        self.groups[k], self.groups[l] = gk, gl
        self.intra, self.means, self.inter = intra, means, inter
        self.value = value

    def assignment(self, **kwargs) -> ClusterAssignment:
        return ClusterAssignment.from_groups(self.groups, **kwargs)


def _closest_pair(members: np.ndarray, D: DistanceMatrix) -> Tuple[float, int, int]:
    sub = D.d[np.ix_(members, members)].copy()
    sub[np.tril_indices(members.size)] = np.inf
    flat = int(np.argmin(sub))
    a, b = divmod(flat, members.size)
    return float(sub[a, b]), int(members[a]), int(members[b])


def round_robin_groups(order: np.ndarray, G: int) -> List[np.ndarray]:
    """Deal clients in `order` to groups 0..G-1 in turn; sizes differ by at most 1."""
    return [np.sort(order[g::G]) for g in range(G)]


def repclust(
    dists: Sequence[LabelDistribution],
    G: int,
    S: int,
    max_iters: int = DEFAULT_MAX_ITERS,
    lam: float = 1.0,
    seed: int = 0,
    counter: Optional[FlopCounter] = None,
) -> ClusterAssignment:
    """
    Swap heuristic for diverse equal-size groups.

    Each pass finds every group's closest pair, ranks groups by that distance
    (most redundant first), and for the first S groups tries swapping the
    first member of group k's closest pair with that of group l. A swap is
    kept only if the scalar objective strictly increases. Passes repeat
    while the objective improves, at most max_iters times.
    """
    L = len(dists)
    if G < 2 or 2 * G > L:
        raise ClusteringError(f"repclust needs 2 <= G <= L/2, got G={G}, L={L}")
    if S < 1 or S > G:
        raise ConfigurationError(f"Search width S must be in [1, G={G}], got {S}")

    rng = stream(seed, "repclust")
    D = pairwise_distances(dists, counter)
    state = _DiversityState(round_robin_groups(rng.permutation(L), G), D, dists, lam, counter)
    trace = [state.value]

    it = 0
    while it < max_iters:
        it += 1
        start = state.value
        pairs = [_closest_pair(g, D) for g in state.groups]
        if counter is not None:
            counter.add(sum(g.size * (g.size - 1) // 2 for g in state.groups))
            counter.add(int(math.ceil(G * math.log2(G))))
        ranked = np.argsort([p[0] for p in pairs], kind="stable")[:S]
        reps = {int(g): pairs[g][1] for g in ranked}

        for a in range(len(ranked)):
            for b in range(a + 1, len(ranked)):
                k, l = int(ranked[a]), int(ranked[b])
                value, proposal = state.propose_swap(k, l, reps[k], reps[l])
                if value > state.value:
                    state.commit(value, proposal)
                    reps[k] = _closest_pair(state.groups[k], D)[1]
                    reps[l] = _closest_pair(state.groups[l], D)[1]

        trace.append(state.value)
        if not state.value > start:
            break

    logger.info(
        "RepClust finished",
        extra={"clients": L, "groups": G, "iterations": it, "objective": state.value, "flops": counter.flops if counter else None},
    )
    return state.assignment(trace=tuple(trace), iterations=it)


# -------------------------------------------------------------------
# Exact oracle
# -------------------------------------------------------------------
def count_equal_size_partitions(L: int, G: int) -> int:
    """Number of unlabeled partitions of L items into G groups of sizes floor/ceil(L/G)."""
    q, r = divmod(L, G)
    sizes = [q + 1] * r + [q] * (G - r)
    denom = math.prod(math.factorial(s) for s in sizes) * math.factorial(r) * math.factorial(G - r)
    return math.factorial(L) // denom


def iter_equal_size_partitions(L: int, G: int) -> Iterator[Tuple[int, ...]]:
    """
    Canonical assignment vectors (group ids in order of first appearance) of all
    near-equal-size partitions, in lexicographic order.
    """
    q, r = divmod(L, G)
    assign = [-1] * L
    counts = [0] * G

    def rec(i: int, opened: int, big: int):
        if i == L:
            if opened == G and min(counts) >= q:
                yield tuple(assign)
            return
        for g in range(min(opened + 1, G)):
            c = counts[g]
            promotes = c == q
            if c > q or (promotes and big >= r):
                continue
            opened_next = max(opened, g + 1)
            counts[g] += 1
            deficit = sum(max(0, q - counts[h]) for h in range(opened_next)) + q * (G - opened_next)
            if deficit <= L - i - 1:
                assign[i] = g
                yield from rec(i + 1, opened_next, big + int(promotes))
            counts[g] -= 1
        assign[i] = -1

    yield from rec(0, 0, 0)


def brute_force_diverse_grouping(
    dists: Sequence[LabelDistribution], G: int, lam: float = 1.0
) -> Tuple[ClusterAssignment, DiversityObjective]:
    """Exhaustive maximiser of the scalar objective; ties go to the lexicographically smallest vector."""
    L = len(dists)
    if G < 1 or G > L:
        raise ClusteringError(f"G={G} infeasible for L={L}")
    total = count_equal_size_partitions(L, G)
    if total > settings.MAX_BRUTE_FORCE_PARTITIONS:
        raise InstanceTooLargeError(f"{total} partitions exceed the limit of {settings.MAX_BRUTE_FORCE_PARTITIONS}")

    D = pairwise_distances(dists)
    best: Optional[Tuple[ClusterAssignment, DiversityObjective]] = None
    for vector in iter_equal_size_partitions(L, G):
        candidate = ClusterAssignment(np.array(vector), G)
        objective = diversity_objective(candidate, D, dists, lam)
        if best is None or objective.scalar > best[1].scalar:
            best = (candidate, objective)
    return best


# -------------------------------------------------------------------
# Quality metric
# -------------------------------------------------------------------
AssignmentLike = Union[ClusterAssignment, Sequence[int], np.ndarray]


def _labels(a: AssignmentLike) -> np.ndarray:
    return a.assignment if isinstance(a, ClusterAssignment) else np.asarray(a, dtype=np.int64)


def adjusted_rand_index(a: AssignmentLike, b: AssignmentLike) -> float:
    """Pair-counting ARI; 1 for identical partitions up to relabeling."""
    x, y = _labels(a), _labels(b)
    if x.size != y.size:
        raise DimensionMismatchError(f"Partitions cover {x.size} and {y.size} items")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    table = np.zeros((xi.max(initial=-1) + 1, yi.max(initial=-1) + 1), dtype=np.int64)
    np.add.at(table, (xi, yi), 1)

    index = float(comb(table, 2).sum())
    rows = float(comb(table.sum(axis=1), 2).sum())
    cols = float(comb(table.sum(axis=0), 2).sum())
    pairs = float(comb(x.size, 2))
    expected = rows * cols / pairs if pairs else 0.0
    max_index = (rows + cols) / 2
    if max_index == expected:
        return 1.0
    return (index - expected) / (max_index - expected)


def export_assignment(assignment: ClusterAssignment, file_path: Path) -> Path:
    """CSV layout: client_id, group_id."""
    df = pd.DataFrame({"client_id": np.arange(assignment.L), "group_id": assignment.assignment})
    return save_dataframe(df, file_path)
