"""
Сервисы DGNN.
"""

from .baseline_service import BaselineResult, BaselineService
from .experiment_service import (
    ExperimentResult,
    ExperimentService,
    evaluate_checkpoint,
    SweepResult,
    run_experiment,
    sweep,
    vote_video,
)
from .export_service import export_features, feature_matrix
from .performance_service import PerformanceReport, compute_performance, map_density
from .registry_service import RegistryService
from .training_service import TrainingService, accuracy

__all__ = [
    "BaselineResult",
    "BaselineService",
    "ExperimentResult",
    "ExperimentService",
    "evaluate_checkpoint",
    "SweepResult",
    "run_experiment",
    "sweep",
    "vote_video",
    "export_features",
    "feature_matrix",
    "PerformanceReport",
    "compute_performance",
    "map_density",
    "RegistryService",
    "TrainingService",
    "accuracy",
]
