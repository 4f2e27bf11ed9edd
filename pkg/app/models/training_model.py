from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.exceptions import DimensionMismatchError


class ModelArch(BaseModel):
    """
    Dense classifier descriptor. No hidden layers means softmax regression;
    otherwise an MLP with ReLU between layers.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    input_dim: int = Field(..., ge=1)
    n_classes: int = Field(..., ge=2)
    hidden: Tuple[int, ...] = ()

    @property
    def kind(self) -> str:
        return "mlp" if self.hidden else "softmax-regression"

    @property
    def layer_sizes(self) -> List[int]:
        return [self.input_dim, *self.hidden, self.n_classes]

    @property
    def layers(self) -> List[Tuple[int, int]]:
        sizes = self.layer_sizes
        return list(zip(sizes[:-1], sizes[1:]))

    @property
    def param_count(self) -> int:
        return sum(fan_in * fan_out + fan_out for fan_in, fan_out in self.layers)


@dataclass(frozen=True)
class ModelParams:
    """Flat parameter vector; per layer the weight matrix (fan_in x fan_out, row-major) then the bias."""
    arch: ModelArch
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64)
        if theta.shape != (self.arch.param_count,):
            raise DimensionMismatchError(
                f"theta has shape {theta.shape}, {self.arch.kind} needs ({self.arch.param_count},)"
            )
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def param_count(self) -> int:
        return self.arch.param_count


class TrainConfig(BaseModel):
    """Local SGD settings; `hidden` selects the model architecture."""
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(10, ge=1)
    batch_size: int = Field(64, ge=1)
    learning_rate: float = Field(0.01, ge=0)
    momentum: float = Field(0.5, ge=0, lt=1)
    train_ratio: float = Field(0.7, gt=0, lt=1)
    hidden: Tuple[int, ...] = ()
