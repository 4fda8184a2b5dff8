"""
Обучение: потери, градиенты, Adam с проекцией, история.
"""

from .batches import Batch, NodeBatch, SequenceBatch
from .gradients import GradcheckReport, GradientBundle, backward, batch_loss, gradcheck
from .history import EpochStats, TrainHistory
from .losses import compute_loss, loss_mse_onehot, loss_softmax_ce
from .optimizer import ClampedAdam, adam_step, width_group

__all__ = [
    "Batch",
    "NodeBatch",
    "SequenceBatch",
    "GradcheckReport",
    "GradientBundle",
    "backward",
    "batch_loss",
    "gradcheck",
    "EpochStats",
    "TrainHistory",
    "compute_loss",
    "loss_mse_onehot",
    "loss_softmax_ce",
    "ClampedAdam",
    "adam_step",
    "width_group",
]
