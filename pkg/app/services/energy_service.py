"""
Energy model: E = E_pre + E_train + E_comm.

Compute energy comes either from counted flops (analytic mode) or from a
recorded power trace that calibrates an effective joules-per-flop (trace mode).
Communication energy follows the uplink/downlink indicator model with a
parametric airtime bits / phy_rate.
"""

from pathlib import Path
from typing import Dict, Iterable, Sequence, Set, Tuple

import numpy as np
import pandas as pd

from app.core.exceptions import ConfigurationError, TraceFormatError
from app.core.logger import logger
from app.models.energy_model import CommConfig, ComputeConfig, EnergyLedger
from app.utils.file_handler import load_csv, save_dataframe

TRACE_COLUMNS = ["t_index", "p_cpu_w", "p_gpu_w", "mem_gb"]


def dbm_to_watts(p_dbm: float) -> float:
    return 10 ** (p_dbm / 10) / 1000


def airtime(param_count: int, comm: CommConfig) -> float:
    """Seconds to send one model: (bits_per_param * |w| + overhead_bits) / phy_rate."""
    if param_count < 0:
        raise ConfigurationError(f"param_count must be >= 0, got {param_count}")
    return (comm.bits_per_param * param_count + comm.overhead_bits) / comm.phy_rate


def comm_energy_round(
    participants_up: Iterable[int], participants_down: Iterable[int], param_count: int, comm: CommConfig
) -> Dict[int, float]:
    """Joules per client for one round; clients in neither set are omitted (0 J)."""
    up: Set[int] = set(participants_up)
    down: Set[int] = set(participants_down)
    dt = airtime(param_count, comm)
    p_up, p_down = dbm_to_watts(comm.p_up_dbm), dbm_to_watts(comm.p_down_dbm)
    return {k: dt * ((k in up) * p_up + (k in down) * p_down) for k in sorted(up | down)}


def compute_energy(flops: float, compute: ComputeConfig, joules_per_flop: float = None) -> float:
    if flops < 0:
        raise ConfigurationError(f"flops must be >= 0, got {flops}")
    return flops * (joules_per_flop if joules_per_flop is not None else compute.joules_per_flop)


def _check_dt(dt: float):
    if dt <= 0:
        raise ConfigurationError(f"Sample interval must be > 0, got {dt}")


def trace_energy(power_samples: Sequence[Tuple[float, float]], dt: float) -> float:
    """Sum over samples of (P_cpu + P_gpu) * dt."""
    _check_dt(dt)
    samples = np.asarray(power_samples, dtype=np.float64).reshape(-1, 2)
    if np.any(samples < 0):
        raise TraceFormatError("Power samples must be non-negative")
    return float(samples.sum() * dt)


def memory_energy(mem_samples: Sequence[float], dt: float, power_per_gb: float = 0.375) -> float:
    """power_per_gb * sum(Omega_i) * dt, with Omega in GB."""
    _check_dt(dt)
    mem = np.asarray(mem_samples, dtype=np.float64)
    if np.any(mem < 0):
        raise TraceFormatError("Memory samples must be non-negative")
    return float(power_per_gb * mem.sum() * dt)


def load_power_trace(file_path: Path) -> pd.DataFrame:
    """Read a trace CSV (t_index, p_cpu_w, p_gpu_w, mem_gb) sorted by t_index."""
    if not Path(file_path).is_file():
        raise TraceFormatError(f"Trace file not found: {file_path}")
    try:
        df = load_csv(Path(file_path), TRACE_COLUMNS)
    except ValueError as e:
        raise TraceFormatError(str(e)) from e
    if df[TRACE_COLUMNS].isna().any().any():
        raise TraceFormatError(f"Trace {file_path} has missing values")
    return df.sort_values("t_index", kind="stable").reset_index(drop=True)


def effective_joules_per_flop(compute: ComputeConfig) -> float:
    """Analytic mode returns the configured constant; trace mode divides trace energy by trace_flops."""
    if compute.mode == "analytic":
        return compute.joules_per_flop
    df = load_power_trace(Path(compute.trace_path))
    dt = compute.sample_interval_s
    units = trace_energy(df[["p_cpu_w", "p_gpu_w"]].to_numpy(), dt)
    memory = memory_energy(df["mem_gb"].to_numpy(), dt, compute.memory_power_per_gb)
    jpf = (units + memory) / compute.trace_flops
    logger.info(
        "Calibrated joules per flop from trace",
        extra={"trace": str(compute.trace_path), "samples": len(df), "units_j": units, "memory_j": memory, "joules_per_flop": jpf},
    )
    return jpf


def relative_energy(ledger: EnergyLedger, baseline_total_j: float) -> float:
    """Percentage of a baseline run's total energy."""
    if not baseline_total_j > 0:
        raise ConfigurationError(f"Baseline energy must be > 0, got {baseline_total_j}")
    return 100.0 * ledger.total_j / baseline_total_j


def export_ledger(ledger: EnergyLedger, file_path: Path) -> Path:
    """CSV layout: round, client_id, pre_j, train_j, comm_j."""
    df = pd.DataFrame(ledger.rows(), columns=["round", "client_id", "pre_j", "train_j", "comm_j"])
    return save_dataframe(df, file_path)
