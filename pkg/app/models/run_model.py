from dataclasses import dataclass, field
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.cluster_model import ClusterAssignment
from app.models.dataset_model import PartitionConfig
from app.models.energy_model import EnergyConfig, EnergyLedger
from app.models.training_model import ModelArch, TrainConfig

Strategy = Literal["random", "powerd", "simclust", "repclust"]
STRATEGIES = ("random", "powerd", "simclust", "repclust")
CLUSTERED = ("simclust", "repclust")

DEFAULT_G_GRID = [2, 5, 10, 20, 25, 50]


class SelectionConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    strategy: Strategy = "random"
    K: int = Field(10, ge=1)
    G: Optional[int] = Field(None, ge=1)
    d: int = Field(20, ge=1)  # PowerD candidate width
    lam: float = Field(1.0, alias="lambda", ge=0)
    gamma: float = Field(0.0, ge=0)
    search_width: int = Field(10, ge=1)
    max_iters: int = Field(100, ge=1)


class ReportConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    accuracy_targets: List[float] = Field(default_factory=lambda: [0.5, 0.55, 0.6])
    sustain_window: int = Field(20, ge=1)
    baseline: str = "random"

    @field_validator("accuracy_targets")
    @classmethod
    def _targets_in_unit_interval(cls, v: List[float]):
        bad = [t for t in v if not 0 < t < 1]
        if bad:
            raise ValueError(f"accuracy targets must lie in (0, 1), got {bad}")
        return v


class SweepConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strategies: List[Strategy] = Field(default_factory=lambda: list(STRATEGIES))
    G: List[int] = Field(default_factory=lambda: list(DEFAULT_G_GRID))
    gamma: List[float] = Field(default_factory=lambda: [0.0])


class BenchConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    L: List[int] = Field(default_factory=lambda: [50, 100, 200, 400])
    rho: List[int] = Field(default_factory=lambda: [5])
    M: int = Field(10, ge=2)
    seed: int = 0


class DpSweepConfig(BaseModel):
    """Noise-robustness sweep on the homogeneous planted scenario (alpha = infinity)."""
    model_config = ConfigDict(extra="forbid")

    gammas: List[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 4.0])
    L: int = Field(50, ge=2)
    rho: int = Field(5, ge=2)
    M: int = Field(10, ge=2)
    seeds: List[int] = Field(default_factory=lambda: list(range(20)))

    @model_validator(mode="after")
    def _check_scenario(self):
        if self.M % self.rho or self.L % self.rho:
            raise ValueError(f"rho={self.rho} must divide both M={self.M} and L={self.L}")
        if any(g < 0 for g in self.gammas):
            raise ValueError("gammas must be >= 0")
        if 2 * (self.L // self.rho) > self.L:
            raise ValueError("repclust needs L/rho groups of size >= 2")
        return self


class RunConfig(BaseModel):
    """A complete experiment: data scheme, local training, selection, energy model and reporting."""
    model_config = ConfigDict(extra="forbid")

    partition: PartitionConfig = Field(default_factory=PartitionConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    selection: SelectionConfig = Field(default_factory=SelectionConfig)
    energy: EnergyConfig = Field(default_factory=EnergyConfig)
    rounds: int = Field(500, ge=1)
    seeds: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    report: ReportConfig = Field(default_factory=ReportConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    bench: BenchConfig = Field(default_factory=BenchConfig)
    dp: DpSweepConfig = Field(default_factory=DpSweepConfig)

    @model_validator(mode="after")
    def _check_selection(self):
        L, sel = self.partition.L, self.selection
        if not self.seeds:
            raise ValueError("seeds must not be empty")
        if sel.K > L:
            raise ValueError(f"K={sel.K} exceeds L={L}")
        if sel.strategy == "powerd" and not sel.K <= sel.d <= L:
            raise ValueError(f"PowerD needs K <= d <= L, got K={sel.K}, d={sel.d}, L={L}")
        if sel.strategy in CLUSTERED:
            if sel.G is None:
                raise ValueError(f"{sel.strategy} needs selection.G")
            upper = L if sel.strategy == "simclust" else L // 2
            if not 2 <= sel.G <= upper:
                raise ValueError(f"{sel.strategy} needs 2 <= G <= {upper}, got G={sel.G}")
        return self

    @property
    def arch(self) -> ModelArch:
        return ModelArch(input_dim=self.partition.feature_dim, n_classes=self.partition.M, hidden=self.train.hidden)

    @property
    def label(self) -> str:
        sel = self.selection
        text = sel.strategy if sel.strategy not in CLUSTERED else f"{sel.strategy}[G={sel.G}]"
        return text if sel.gamma == 0 else f"{text}[gamma={sel.gamma:g}]"


class RoundRecord(BaseModel):
    """One communication round: who trained, how the global model scored, what it cost."""
    round: int = Field(..., ge=1)
    selected: List[int]
    accuracy: float = Field(..., ge=0, le=1)
    loss: float
    pre_j: float = Field(..., ge=0)
    train_j: float = Field(..., ge=0)
    comm_j: float = Field(..., ge=0)
    cum_total_j: float = Field(..., ge=0)
    coverage: int = Field(0, ge=0)

    @property
    def total_j(self) -> float:
        return self.pre_j + self.train_j + self.comm_j


class SustainedAccuracy(BaseModel):
    target: float
    round: int
    energy_j: float


@dataclass
class ExperimentResult:
    label: str
    strategy: str
    seed: int
    records: List[RoundRecord]
    ledger: EnergyLedger
    param_count: int
    joules_per_flop: float
    assignment: Optional[ClusterAssignment] = None
    clustering_flops: int = 0
    selection_flops: List[int] = field(default_factory=list)
