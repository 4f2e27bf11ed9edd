import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from app.core.exceptions import InvalidDistributionError
from app.models.distribution_model import LabelDistribution

INFINITY_SENTINELS = {"inf", "infinity", "+inf", "+infinity"}


class PartitionConfig(BaseModel):
    """
    The (alpha, rho)-Dir data scheme: rho contiguous client blocks, each owning
    M/rho classes, with Dirichlet(alpha) proportions inside the block.
    alpha = infinity gives exactly uniform proportions on the block's classes.
    """
    model_config = ConfigDict(extra="forbid")

    L: int = Field(100, ge=1)
    M: int = Field(10, ge=2)
    alpha: float = 1.0
    rho: int = Field(1, ge=1)
    samples_per_client: int = Field(200, ge=1)
    feature_dim: int = Field(16, ge=1)
    class_separation: float = Field(3.0, gt=0)
    seed: int = 0

    @field_validator("alpha", mode="before")
    @classmethod
    def _parse_alpha(cls, v: Union[str, float]):
        if isinstance(v, str):
            if v.strip().lower() in INFINITY_SENTINELS:
                return math.inf
            v = float(v)
        return v

    @field_validator("alpha")
    @classmethod
    def _positive_alpha(cls, v: float):
        if not v > 0:
            raise ValueError("alpha must be > 0 (or 'infinity')")
        return v

    @model_validator(mode="after")
    def _check_blocks(self):
        if self.rho > self.M or self.M % self.rho != 0:
            raise ValueError(f"rho={self.rho} must divide M={self.M}")
        if self.L < self.rho:
            raise ValueError(f"L={self.L} must be >= rho={self.rho}")
        if self.L % self.rho != 0:
            raise ValueError(f"rho={self.rho} must divide L={self.L}")
        return self

    @field_serializer("alpha")
    def _dump_alpha(self, v: float):
        return "infinity" if math.isinf(v) else v

    @property
    def homogeneous(self) -> bool:
        return math.isinf(self.alpha)

    @property
    def classes_per_partition(self) -> int:
        return self.M // self.rho

    @property
    def clients_per_partition(self) -> int:
        return self.L // self.rho

    def partition_of(self, client_id: int) -> int:
        return client_id // self.clients_per_partition


@dataclass(frozen=True)
class ClientDataset:
    """A client's local samples D_j."""
    client_id: int
    features: np.ndarray
    labels: np.ndarray
    M: int

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or features.shape[0] != labels.shape[0]:
            raise InvalidDistributionError(
                f"Client {self.client_id}: features {features.shape} do not match labels {labels.shape}"
            )
        if labels.size and (labels.min() < 0 or labels.max() >= self.M):
            raise InvalidDistributionError(f"Client {self.client_id}: labels outside [0, {self.M})")
        features.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n_samples(self) -> int:
        return int(self.labels.size)

    @property
    def label_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.M)

    @property
    def label_distribution(self) -> LabelDistribution:
        return LabelDistribution.from_counts(self.label_counts)

    @classmethod
    def concat(cls, shards: Sequence["ClientDataset"], client_id: int = -1) -> "ClientDataset":
        """Union of shards, e.g. the global test set built from client test shards."""
        return cls(
            client_id=client_id,
            features=np.concatenate([s.features for s in shards]),
            labels=np.concatenate([s.labels for s in shards]),
            M=shards[0].M,
        )
