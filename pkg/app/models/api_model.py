from typing import List, Optional

from pydantic import BaseModel, Field

from app.models.run_model import DpSweepConfig, RoundRecord, RunConfig, SustainedAccuracy


class RunRequest(BaseModel):
    """
    Request model for POST /api/runs.
    """
    config: RunConfig = Field(default_factory=RunConfig)
    seed: int = 0
    include_rounds: bool = False  # per-round records can be large


class RunSummary(BaseModel):
    """
    Response model for POST /api/runs.
    """
    strategy: str
    seed: int
    rounds: int
    param_count: int
    final_accuracy: float
    final_loss: float
    pre_j: float
    train_j: float
    comm_j: float
    total_j: float
    clustering_flops: int = 0
    sustained: List[SustainedAccuracy] = Field(default_factory=list)
    records: Optional[List[RoundRecord]] = None


class AriRequest(DpSweepConfig):
    search_width: int = Field(10, ge=1)
    max_iters: int = Field(100, ge=1)


class AriRow(BaseModel):
    gamma: float
    seed: int
    method: str
    ari: float


class AriResponse(BaseModel):
    rows: List[AriRow] = Field(default_factory=list)
    summary: List[dict] = Field(default_factory=list)
