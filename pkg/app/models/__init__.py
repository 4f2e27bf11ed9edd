# app/models/__init__.py

from app.models.cluster_model import ClusterAssignment, DiversityObjective
from app.models.dataset_model import ClientDataset, PartitionConfig
from app.models.distribution_model import DistanceMatrix, LabelDistribution
from app.models.energy_model import CommConfig, ComputeConfig, EnergyConfig, EnergyLedger, FlopCounter
from app.models.run_model import RoundRecord, RunConfig, SelectionConfig
from app.models.training_model import ModelArch, ModelParams, TrainConfig

__all__ = [
    "ClusterAssignment",
    "DiversityObjective",
    "ClientDataset",
    "PartitionConfig",
    "DistanceMatrix",
    "LabelDistribution",
    "CommConfig",
    "ComputeConfig",
    "EnergyConfig",
    "EnergyLedger",
    "FlopCounter",
    "RoundRecord",
    "RunConfig",
    "SelectionConfig",
    "ModelArch",
    "ModelParams",
    "TrainConfig",
]
