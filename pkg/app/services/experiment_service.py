"""
Experiment orchestration.

run_experiment: partition -> optional DP -> optional one-time clustering ->
T rounds of select / local train / aggregate / evaluate, charging every joule
to an EnergyLedger. Also the G/strategy sweep, the noise-robustness ARI sweep
and the clustering scaling bench.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigurationError, SimulationError
from app.core.logger import logger
from app.models.cluster_model import ClusterAssignment
from app.models.dataset_model import ClientDataset, PartitionConfig
from app.models.energy_model import SERVER_ID, EnergyLedger, FlopCounter
from app.models.run_model import CLUSTERED, BenchConfig, DpSweepConfig, ExperimentResult, RoundRecord, RunConfig
from app.services import clustering_service, fl_service
from app.services.energy_service import comm_energy_round, compute_energy, effective_joules_per_flop
from app.services.partition_service import (
    draw_client_label_distributions,
    materialize_client_datasets,
    planted_partition,
    split_all,
)
from app.services.privacy_service import privatize_distributions
from app.services.selection_service import (
    SELECTORS,
    SelectionContext,
    draw_powerd_candidates,
    label_coverage,
    select_powerd,
)
from app.utils.rng import derive_seed

AGGREGATION_FLOPS_PER_PARAM = 2  # one multiply-add per parameter per client


# -------------------------------------------------------------------
# One-time clustering
# -------------------------------------------------------------------
def cluster_clients(cfg: RunConfig, train: Sequence[ClientDataset], seed: int, counter: FlopCounter) -> ClusterAssignment:
    """Cluster on the (optionally privatised) empirical label distributions the clients report."""
    sel = cfg.selection
    dists = privatize_distributions([ds.label_distribution for ds in train], sel.gamma, seed)
    if sel.strategy == "simclust":
        return clustering_service.simclust(dists, sel.G, seed, max_iters=sel.max_iters, counter=counter)
    return clustering_service.repclust(
        dists, sel.G, min(sel.search_width, sel.G), sel.max_iters, sel.lam, seed, counter=counter
    )


def _select(cfg: RunConfig, ctx: SelectionContext, model, train: Sequence[ClientDataset], counter: FlopCounter) -> List[int]:
    strategy = cfg.selection.strategy
    if strategy != "powerd":
        return SELECTORS[strategy](ctx, counter)
    candidates = draw_powerd_candidates(ctx, counter)
    losses = [fl_service.mean_loss(model, train[j]) for j in candidates]
    probed = sum(train[j].n_samples for j in candidates)
    counter.add(fl_service.count_forward_flops_per_sample(model.arch) * probed)
    return select_powerd(ctx, candidates, losses)


# -------------------------------------------------------------------
# Single run
# -------------------------------------------------------------------
def run_experiment(cfg: RunConfig, seed: int) -> ExperimentResult:
    """Fully deterministic per (cfg, seed); `seed` replaces partition.seed for data generation."""
    started = time.perf_counter()
    sel = cfg.selection
    pcfg = cfg.partition.model_copy(update={"seed": seed})

    dists = draw_client_label_distributions(pcfg)
    datasets = materialize_client_datasets(pcfg, dists)
    train, _, global_test = split_all(datasets, cfg.train.train_ratio, seed)
    if any(ds.n_samples == 0 for ds in train):
        raise ConfigurationError("Every client needs at least one training sample")

    model = fl_service.init_model(cfg.arch, seed)
    P = model.param_count
    jpf = effective_joules_per_flop(cfg.energy.compute)
    ledger = EnergyLedger()

    def joules(flops: float) -> float:
        return compute_energy(flops, cfg.energy.compute, jpf)

    assignment: Optional[ClusterAssignment] = None
    setup_flops = 0
    if sel.strategy in CLUSTERED:
        counter = FlopCounter()
        assignment = cluster_clients(cfg, train, seed, counter)
        setup_flops = counter.flops
        ledger.charge(0, SERVER_ID, pre_j=joules(setup_flops))

    sizes = np.array([ds.n_samples for ds in train])
    records: List[RoundRecord] = []
    selection_flops: List[int] = []
    cumulative = ledger.total_j

    with ThreadPoolExecutor(max_workers=settings.TRAIN_WORKERS) as pool:
        for t in range(1, cfg.rounds + 1):
            ctx = SelectionContext(round_t=t, K=sel.K, sizes=sizes, seed=seed, assignment=assignment, d=sel.d)
            sel_counter = FlopCounter()
            selected = _select(cfg, ctx, model, train, sel_counter)
            selection_flops.append(sel_counter.flops)

            round_seed = derive_seed(seed, "round", t)
            futures = {j: pool.submit(fl_service.local_train, model, train[j], cfg.train, round_seed) for j in selected}
            updates = {j: futures[j].result() for j in selected}

            comm = comm_energy_round(selected, selected, P, cfg.energy.comm)
            server_flops = AGGREGATION_FLOPS_PER_PARAM * len(selected) * P + sel_counter.flops
            pre_share = joules(server_flops) / len(selected)
            for j in selected:
                ledger.charge(t, j, pre_j=pre_share, train_j=joules(updates[j][2]), comm_j=comm[j])

            model = fl_service.fedavg_aggregate([(updates[j][0], train[j].n_samples) for j in selected])
            accuracy, loss = fl_service.evaluate(model, global_test)

            entry = ledger.round_entry(t)
            pre_j = entry.pre_j + (ledger.round_entry(0).pre_j if t == 1 else 0.0)
            cumulative += entry.total_j
            records.append(
                RoundRecord(
                    round=t,
                    selected=selected,
                    accuracy=accuracy,
                    loss=loss,
                    pre_j=pre_j,
                    train_j=entry.train_j,
                    comm_j=entry.comm_j,
                    cum_total_j=cumulative,
                    coverage=label_coverage(selected, train),
                )
            )
            logger.debug(
                f"Round {t}: acc={accuracy:.4f}",
                extra={"round": t, "strategy": sel.strategy, "selected": selected, "round_j": entry.total_j},
            )

    duration = time.perf_counter() - started
    logger.info(
        f"Run {cfg.label} seed={seed} finished",
        extra={
            "strategy": cfg.label,
            "seed": seed,
            "rounds": cfg.rounds,
            "final_accuracy": records[-1].accuracy,
            "total_j": ledger.total_j,
            "duration": round(duration, 3),
        },
    )
    return ExperimentResult(
        label=cfg.label,
        strategy=sel.strategy,
        seed=seed,
        records=records,
        ledger=ledger,
        param_count=P,
        joules_per_flop=jpf,
        assignment=assignment,
        clustering_flops=setup_flops,
        selection_flops=selection_flops,
    )


def run_all_seeds(cfg: RunConfig) -> List[ExperimentResult]:
    return [run_experiment(cfg, seed) for seed in cfg.seeds]


# -------------------------------------------------------------------
# Sweep over strategies x G x gamma
# -------------------------------------------------------------------
def with_selection(cfg: RunConfig, **changes) -> RunConfig:
    """Re-validated copy of cfg with selection fields replaced."""
    raw = cfg.model_dump(by_alias=True)
    raw["selection"].update(changes)
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e


def sweep_variants(cfg: RunConfig) -> List[RunConfig]:
    """Every feasible strategy/G/gamma combination; G and gamma only vary for clustered strategies."""
    variants = []
    for strategy in cfg.sweep.strategies:
        if strategy not in CLUSTERED:
            variants.append(with_selection(cfg, strategy=strategy, G=None, gamma=0.0))
            continue
        for G in cfg.sweep.G:
            for gamma in cfg.sweep.gamma:
                try:
                    variants.append(with_selection(cfg, strategy=strategy, G=G, gamma=gamma))
                except ConfigurationError:
                    logger.warning(f"Skipping infeasible sweep point {strategy} G={G} (L={cfg.partition.L})")
    return variants


def run_sweep(cfg: RunConfig) -> List[ExperimentResult]:
    results = []
    for variant in sweep_variants(cfg):
        results.extend(run_all_seeds(variant))
    return results


# -------------------------------------------------------------------
# Noise robustness of the clustering (homogeneous planted scenario)
# -------------------------------------------------------------------
def dp_ari_sweep(dp: DpSweepConfig, search_width: int = 10, max_iters: int = 100, lam: float = 1.0) -> pd.DataFrame:
    """
    Rows (gamma, seed, method, ari). SimClust (G = rho) is scored against the
    planted blocks; RepClust (G = L/rho) against its own clean-input grouping
    for the same seed.
    """
    rows = []
    G_rep = dp.L // dp.rho
    S = min(search_width, G_rep)
    for seed in dp.seeds:
        pcfg = PartitionConfig(L=dp.L, M=dp.M, alpha="infinity", rho=dp.rho, seed=seed)
        dists = draw_client_label_distributions(pcfg)
        planted = ClusterAssignment(planted_partition(pcfg), dp.rho)
        clean_rep = clustering_service.repclust(dists, G_rep, S, max_iters, lam, seed)
        for gamma in dp.gammas:
            noisy = privatize_distributions(dists, gamma, seed)
            sim = clustering_service.simclust(noisy, dp.rho, seed, max_iters=max_iters)
            rep = clustering_service.repclust(noisy, G_rep, S, max_iters, lam, seed)
            rows.append({"gamma": gamma, "seed": seed, "method": "simclust", "ari": clustering_service.adjusted_rand_index(sim, planted)})
            rows.append({"gamma": gamma, "seed": seed, "method": "repclust", "ari": clustering_service.adjusted_rand_index(rep, clean_rep)})
        logger.debug(f"ARI sweep seed {seed} done", extra={"seed": seed})
    return pd.DataFrame(rows, columns=["gamma", "seed", "method", "ari"])


# -------------------------------------------------------------------
# Clustering cost scaling
# -------------------------------------------------------------------
BENCH_COLUMNS = ["L", "rho", "method", "G", "flops", "divergences", "iterations", "wall_time_s", "status"]


def _bench_row(L: int, rho: int, method: str, G: Optional[int], status: str, **measured) -> Dict:
    row = {"L": L, "rho": rho, "method": method, "G": G, "flops": None, "divergences": None,
           "iterations": None, "wall_time_s": None, "status": status}
    row.update(measured)
    return row


def scaling_bench(bench: BenchConfig, search_width: int = 10, lam: float = 1.0) -> pd.DataFrame:
    """SimClust with G = rho and RepClust with G = L/rho on planted distributions, per (L, rho)."""
    rows = []
    for L in bench.L:
        for rho in bench.rho:
            try:
                pcfg = PartitionConfig(L=L, M=bench.M, alpha="infinity", rho=rho, seed=bench.seed)
            except ValidationError as e:
                logger.warning(f"Bench point L={L} rho={rho} skipped: {e.errors()[0]['msg']}")
                rows.append(_bench_row(L, rho, "simclust", None, "skipped"))
                rows.append(_bench_row(L, rho, "repclust", None, "skipped"))
                continue
            dists = draw_client_label_distributions(pcfg)
            for method, G in (("simclust", rho), ("repclust", L // rho)):
                counter = FlopCounter()
                started = time.perf_counter()
                try:
                    if method == "simclust":
                        result = clustering_service.simclust(dists, G, bench.seed, counter=counter)
                    else:
                        result = clustering_service.repclust(dists, G, min(search_width, G), lam=lam, seed=bench.seed, counter=counter)
                except SimulationError as e:
                    logger.warning(f"Bench point L={L} rho={rho} {method} skipped: {e}")
                    rows.append(_bench_row(L, rho, method, G, "skipped"))
                    continue
                rows.append(
                    _bench_row(
                        L, rho, method, G, "ok",
                        flops=counter.flops,
                        divergences=counter.divergences,
                        iterations=result.iterations,
                        wall_time_s=time.perf_counter() - started,
                    )
                )
    return pd.DataFrame(rows, columns=BENCH_COLUMNS)
