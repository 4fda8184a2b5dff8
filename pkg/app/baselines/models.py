"""
Электронные модели сравнения: линейный классификатор, MLP, PPRGo.
"""

from enum import Enum

import torch
from torch import nn

from app.core.exceptions import ShapeException


class PprGoVariant(str, Enum):
    """Агрегатор PPRGo."""

    SUM = "sum"  # PPRGo-S
    WEIGHTED_SUM = "weighted_sum"  # PPRGo-WS, веса - оценки PageRank


class LinearClassifier(nn.Module):
    """Линейный softmax-классификатор."""

    def __init__(self, n_features: int, n_classes: int):
        super().__init__()
        self.linear = nn.Linear(n_features, n_classes, dtype=torch.float64)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        return self.linear(features)


class MlpModel(nn.Module):
    """MLP с одним скрытым слоем (ReLU)."""

    def __init__(self, n_features: int, n_classes: int, hidden: int = 8):
        super().__init__()
        self.hidden = nn.Linear(n_features, hidden, dtype=torch.float64)
        self.output = nn.Linear(hidden, n_classes, dtype=torch.float64)

    def forward(self, features: torch.Tensor) -> torch.Tensor:
        return self.output(torch.relu(self.hidden(features)))


class PprGoModel(nn.Module):
    """
    PPRGo: MLP считает logits каждого узла, затем сумма (S) или взвешенная
    по PageRank сумма (WS) logits top-k соседей.
    """

    def __init__(self, n_features: int, n_classes: int, hidden: int = 8, variant: PprGoVariant = PprGoVariant.SUM):
        super().__init__()
        self.mlp = MlpModel(n_features, n_classes, hidden)
        self.variant = PprGoVariant(variant)

    def forward(self, features: torch.Tensor, indices: torch.Tensor, scores: torch.Tensor) -> torch.Tensor:
        """
        Args:
            features: Признаки всех узлов (n, d)
            indices: Top-k соседи целевых узлов (r, k)
            scores: Оценки PageRank (r, k)

        Returns:
            torch.Tensor: Logits целевых узлов (r, C)
        """
        if indices.shape != scores.shape:
            raise ShapeException("Индексы и оценки PPR разной формы")
        neighbor_logits = self.mlp(features)[indices]
        if self.variant == PprGoVariant.WEIGHTED_SUM:
            neighbor_logits = neighbor_logits * scores.to(neighbor_logits.dtype)[..., None]
        return neighbor_logits.sum(dim=1)
