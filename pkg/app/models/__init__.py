"""
Модели реестра запусков DGNN.
"""

from .base import BaseModel
from .run import ExperimentRun, EpochRecord, SweepPoint, RunStatus

__all__ = [
    "BaseModel",
    "ExperimentRun",
    "EpochRecord",
    "SweepPoint",
    "RunStatus"
]
