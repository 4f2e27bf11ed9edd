from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import ConfigurationError

SERVER_ID = -1  # ledger rows for server-side one-time costs


class CommConfig(BaseModel):
    """
    Uplink/downlink radio model. Powers in dBm, rate in bits/second.
    """
    model_config = ConfigDict(extra="forbid")

    p_up_dbm: float = 9.0
    p_down_dbm: float = 20.0
    phy_rate: float = Field(150e6, gt=0)
    bits_per_param: int = Field(32, ge=1)
    overhead_bits: float = Field(0.0, ge=0)


class ComputeConfig(BaseModel):
    """
    Compute energy model. `analytic` multiplies flop counts by joules_per_flop;
    `trace` calibrates joules_per_flop from a recorded power trace.
    """
    model_config = ConfigDict(extra="forbid")

    mode: Literal["analytic", "trace"] = "analytic"
    joules_per_flop: float = Field(1e-9, gt=0)
    memory_power_per_gb: float = Field(0.375, ge=0)
    sample_interval_s: float = Field(15.0, gt=0)
    trace_path: Optional[str] = None
    trace_flops: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _trace_inputs(self):
        if self.mode == "trace" and (self.trace_path is None or self.trace_flops is None):
            raise ValueError("trace mode needs both trace_path and trace_flops")
        return self


class EnergyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    comm: CommConfig = Field(default_factory=CommConfig)
    compute: ComputeConfig = Field(default_factory=ComputeConfig)


@dataclass
class FlopCounter:
    """
    Per-invocation compute-cost counter. Never shared between concurrent
    invocations; callers merge finished counters.
    """
    flops: int = 0
    divergences: int = 0

    def add(self, flops: int) -> None:
        self.flops += int(flops)

    def add_divergence(self, flops: int) -> None:
        self.divergences += 1
        self.flops += int(flops)

    def merge(self, other: "FlopCounter") -> "FlopCounter":
        self.flops += other.flops
        self.divergences += other.divergences
        return self


@dataclass
class EnergyEntry:
    pre_j: float = 0.0
    train_j: float = 0.0
    comm_j: float = 0.0

    @property
    def total_j(self) -> float:
        return self.pre_j + self.train_j + self.comm_j


@dataclass
class EnergyLedger:
    """
    Joules per (round, client) split into pre-processing, training and
    communication. Round 0 holds one-time costs paid before training.
    """
    entries: Dict[Tuple[int, int], EnergyEntry] = field(default_factory=dict)
    by_round: Dict[int, EnergyEntry] = field(default_factory=dict, repr=False)

    def charge(self, round_t: int, client_id: int, pre_j: float = 0.0, train_j: float = 0.0, comm_j: float = 0.0):
        if min(pre_j, train_j, comm_j) < 0:
            raise ConfigurationError(f"Negative energy charge at round {round_t}, client {client_id}")
        entry = self.entries.setdefault((int(round_t), int(client_id)), EnergyEntry())
        entry.pre_j += float(pre_j)
        entry.train_j += float(train_j)
        entry.comm_j += float(comm_j)
        running = self.by_round.setdefault(int(round_t), EnergyEntry())
        running.pre_j += float(pre_j)
        running.train_j += float(train_j)
        running.comm_j += float(comm_j)

    def _sorted(self) -> List[Tuple[Tuple[int, int], EnergyEntry]]:
        return sorted(self.entries.items())

    def round_entry(self, round_t: int) -> EnergyEntry:
        """Running totals for one round (a zero entry for rounds never charged)."""
        e = self.by_round.get(int(round_t), EnergyEntry())
        return EnergyEntry(e.pre_j, e.train_j, e.comm_j)

    def totals(self, through_round: Optional[int] = None) -> EnergyEntry:
        out = EnergyEntry()
        for (t, _), e in self._sorted():
            if through_round is not None and t > through_round:
                continue
            out.pre_j += e.pre_j
            out.train_j += e.train_j
            out.comm_j += e.comm_j
        return out

    @property
    def total_j(self) -> float:
        return self.totals().total_j

    @property
    def rounds(self) -> List[int]:
        return sorted(self.by_round)

    def rows(self) -> List[dict]:
        return [
            {"round": t, "client_id": c, "pre_j": e.pre_j, "train_j": e.train_j, "comm_j": e.comm_j}
            for (t, c), e in self._sorted()
        ]
