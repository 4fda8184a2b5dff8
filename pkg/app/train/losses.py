"""
Функции потерь.
"""

import torch
import torch.nn.functional as F

from app.core.exceptions import DomainException, ShapeException
from app.schemas.training import LossKind


def _check_labels(outputs: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    labels = torch.as_tensor(labels, dtype=torch.int64)
    if outputs.ndim != 2 or labels.shape != (outputs.shape[0],):
        raise ShapeException(f"Выходы {tuple(outputs.shape)} не согласованы с метками {tuple(labels.shape)}")
    if labels.numel() and (labels.min() < 0 or labels.max() >= outputs.shape[1]):
        raise DomainException(f"Метка вне диапазона [0, {outputs.shape[1] - 1}]")
    return labels


def loss_softmax_ce(logits: torch.Tensor, labels) -> torch.Tensor:
    """Средняя кросс-энтропия softmax."""
    labels = _check_labels(logits, labels)
    return F.cross_entropy(logits, labels)


def loss_mse_onehot(intensities: torch.Tensor, labels) -> torch.Tensor:
    """Средний квадрат отклонения интенсивностей детекторов от one-hot цели."""
    labels = _check_labels(intensities, labels)
    target = F.one_hot(labels, intensities.shape[1]).to(intensities.dtype)
    return F.mse_loss(intensities, target)


LOSSES = {
    LossKind.SOFTMAX_CE: loss_softmax_ce,
    LossKind.MSE_ONEHOT: loss_mse_onehot,
}


def compute_loss(outputs: torch.Tensor, labels, kind: LossKind) -> torch.Tensor:
    return LOSSES[LossKind(kind)](outputs, labels)
