import numpy as np
import pytest

from app.models.dataset_model import PartitionConfig
from app.models.distribution_model import LabelDistribution
from app.models.run_model import RunConfig
from app.utils.helpers import set_dotted


def random_simplex(rng: np.random.Generator, M: int, n: int):
    return [LabelDistribution(p) for p in rng.dirichlet(np.ones(M), size=n)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def planted_cfg():
    """Homogeneous planted scenario: 5 blocks of 10 identical clients."""
    return PartitionConfig(L=50, M=10, alpha="infinity", rho=5, seed=0)


@pytest.fixture
def make_run_config():
    """Small but complete RunConfig; keyword overrides use dotted names, e.g. **{"selection.K": 3}."""

    def _make(**overrides) -> RunConfig:
        raw = {
            "partition": {"L": 6, "M": 4, "alpha": 1.0, "rho": 2, "samples_per_client": 40, "feature_dim": 4},
            "train": {"epochs": 1, "batch_size": 16, "learning_rate": 0.05},
            "selection": {"strategy": "random", "K": 2, "G": 2, "d": 4},
            "rounds": 3,
            "seeds": [0],
            "report": {"accuracy_targets": [0.3], "sustain_window": 2},
            "sweep": {"strategies": ["random", "simclust"], "G": [2, 3], "gamma": [0.0]},
            "bench": {"L": [10], "rho": [2], "M": 4},
            "dp": {"gammas": [0.0, 1.0], "L": 10, "rho": 5, "M": 10, "seeds": [0]},
        }
        for key, value in overrides.items():
            set_dotted(raw, key, value)
        return RunConfig.model_validate(raw)

    return _make
