"""
Per-round CSVs, summary JSON and sweep CSVs.

The summary is always computed from the per-round frame, so `report` can
re-summarise a CSV written by an earlier run without re-running anything.
"""

import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from app.core.exceptions import ConfigurationError
from app.core.logger import logger
from app.models.run_model import ExperimentResult, ReportConfig, RoundRecord, SustainedAccuracy
from app.services.clustering_service import export_assignment
from app.services.energy_service import export_ledger
from app.utils.file_handler import ensure_dir, load_csv, save_dataframe, save_json

ROUND_COLUMNS = ["seed", "round", "strategy", "accuracy", "loss", "pre_j", "train_j", "comm_j", "cum_total_j", "coverage"]
ARI_COLUMNS = ["gamma", "seed", "method", "ari"]


# -------------------------------------------------------------------
# Sustained accuracy
# -------------------------------------------------------------------
def sustained_from_arrays(
    rounds: Sequence[int], accuracy: Sequence[float], cum_total_j: Sequence[float], target: float, window: int = 20
) -> Optional[SustainedAccuracy]:
    """Earliest r with accuracy >= target on rounds r..r+window-1, and cumulative energy through the window end."""
    if window < 1:
        raise ConfigurationError(f"window must be >= 1, got {window}")
    run = 0
    for i, acc in enumerate(accuracy):
        run = run + 1 if acc >= target else 0
        if run == window:
            start = i - window + 1
            return SustainedAccuracy(target=target, round=int(rounds[start]), energy_j=float(cum_total_j[i]))
    return None


def energy_to_sustained_accuracy(
    records: Sequence[RoundRecord], target: float, window: int = 20
) -> Optional[SustainedAccuracy]:
    return sustained_from_arrays(
        [r.round for r in records], [r.accuracy for r in records], [r.cum_total_j for r in records], target, window
    )


# -------------------------------------------------------------------
# Frames
# -------------------------------------------------------------------
def rounds_frame(results: Sequence[ExperimentResult]) -> pd.DataFrame:
    rows = [
        {
            "seed": res.seed,
            "round": rec.round,
            "strategy": res.label,
            "accuracy": rec.accuracy,
            "loss": rec.loss,
            "pre_j": rec.pre_j,
            "train_j": rec.train_j,
            "comm_j": rec.comm_j,
            "cum_total_j": rec.cum_total_j,
            "coverage": rec.coverage,
        }
        for res in results
        for rec in res.records
    ]
    return pd.DataFrame(rows, columns=ROUND_COLUMNS)


def _mean_std(values: Sequence[float]) -> Dict[str, float]:
    arr = np.asarray(values, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std()) if arr.size > 1 else 0.0}


def summarize_rounds(
    df: pd.DataFrame, targets: Sequence[float], window: int = 20, baseline: Optional[str] = "random"
) -> Dict[str, Any]:
    """
    Per strategy: final accuracy mean/std over seeds, energy breakdown, relative
    energy against the baseline strategy (when present) and energy-to-target.
    """
    if df.empty:
        raise ConfigurationError("Nothing to summarise: no rounds")
    df = df.sort_values(["strategy", "seed", "round"], kind="stable")
    strategies: Dict[str, Any] = {}
    for label, frame in df.groupby("strategy", sort=True):
        finals, totals, parts, to_target = [], [], {"pre_j": [], "train_j": [], "comm_j": []}, {t: [] for t in targets}
        for _, run in frame.groupby("seed", sort=True):
            finals.append(float(run["accuracy"].iloc[-1]))
            totals.append(float(run["cum_total_j"].iloc[-1]))
            for col in parts:
                parts[col].append(float(run[col].sum()))
            for target in targets:
                to_target[target].append(
                    sustained_from_arrays(run["round"].tolist(), run["accuracy"].tolist(), run["cum_total_j"].tolist(), target, window)
                )

        targets_out = []
        for target, hits in to_target.items():
            reached = [h for h in hits if h is not None]
            targets_out.append(
                {
                    "target": target,
                    "reached": len(reached),
                    "runs": len(hits),
                    "median_round": float(np.median([h.round for h in reached])) if reached else None,
                    "mean_energy_j": float(np.mean([h.energy_j for h in reached])) if reached else None,
                }
            )
        strategies[str(label)] = {
            "seeds": len(finals),
            "final_accuracy": _mean_std(finals),
            "total_j": _mean_std(totals),
            "pre_j": _mean_std(parts["pre_j"]),
            "train_j": _mean_std(parts["train_j"]),
            "comm_j": _mean_std(parts["comm_j"]),
            "energy_to_target": targets_out,
        }

    if baseline in strategies:
        base_total = strategies[baseline]["total_j"]["mean"]
        for entry in strategies.values():
            entry["relative_energy_pct"] = 100.0 * entry["total_j"]["mean"] / base_total if base_total > 0 else None
    else:
        if baseline:
            logger.warning(f"Baseline '{baseline}' not among the runs; relative energy omitted")
        for entry in strategies.values():
            entry["relative_energy_pct"] = None

    return {"baseline": baseline, "window": window, "strategies": strategies}


def summarize_ari(df: pd.DataFrame) -> List[Dict[str, Any]]:
    """Mean and std of ARI per (method, gamma)."""
    out = []
    for (method, gamma), frame in df.groupby(["method", "gamma"], sort=True):
        stats = _mean_std(frame["ari"].tolist())
        out.append({"method": method, "gamma": float(gamma), "ari_mean": stats["mean"], "ari_std": stats["std"], "seeds": len(frame)})
    return out


# -------------------------------------------------------------------
# Emission
# -------------------------------------------------------------------
def _slug(label: str) -> str:
    return re.sub(r"[^\w.=-]+", "_", label).strip("_")


def emit_report(results: Sequence[ExperimentResult], out_dir: Path, report: ReportConfig) -> Dict[str, Path]:
    """Write rounds.csv, summary.json and per-run ledger/assignment CSVs under out_dir."""
    if not results:
        raise ConfigurationError("emit_report needs at least one completed run")
    out_dir = ensure_dir(out_dir)
    df = rounds_frame(results)
    written = {"rounds": save_dataframe(df, out_dir / "rounds.csv")}

    summary = summarize_rounds(df, report.accuracy_targets, report.sustain_window, report.baseline)
    summary["runs"] = [
        {
            "strategy": res.label,
            "seed": res.seed,
            "param_count": res.param_count,
            "joules_per_flop": res.joules_per_flop,
            "clustering_flops": res.clustering_flops,
            "total_j": res.ledger.total_j,
        }
        for res in results
    ]
    written["summary"] = save_json(summary, out_dir / "summary.json")

    runs_dir = out_dir / "runs"
    for res in results:
        stem = f"{_slug(res.label)}_seed{res.seed}"
        export_ledger(res.ledger, runs_dir / f"{stem}_ledger.csv")
        if res.assignment is not None:
            export_assignment(res.assignment, runs_dir / f"{stem}_assignment.csv")
    return written


def write_ari_report(df: pd.DataFrame, out_dir: Path) -> Dict[str, Path]:
    out_dir = ensure_dir(out_dir)
    return {
        "ari": save_dataframe(df[ARI_COLUMNS], out_dir / "ari.csv"),
        "ari_summary": save_json(summarize_ari(df), out_dir / "ari_summary.json"),
    }


def load_rounds(file_path: Path) -> pd.DataFrame:
    if not Path(file_path).is_file():
        raise ConfigurationError(f"Rounds CSV not found: {file_path}")
    try:
        return load_csv(file_path, ROUND_COLUMNS)
    except ValueError as e:
        raise ConfigurationError(str(e)) from e
