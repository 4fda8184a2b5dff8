"""
Сервис обучения электронных моделей сравнения.

Содержит линейный классификатор на PCA-признаках, MLP и PPRGo (S/WS)
с перебором L2 weight decay.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np
import torch
import torch.nn.functional as F
from loguru import logger
from torch import nn
from tqdm import tqdm

from app.baselines.models import LinearClassifier, MlpModel, PprGoModel, PprGoVariant
from app.graphs.graph import PprTable
from app.schemas.training import BaselineConfig


@dataclass
class BaselineResult:
    """Лучшая модель по test accuracy и точности по всем weight decay."""

    model: nn.Module
    weight_decay: float
    train_accuracy: float
    test_accuracy: Optional[float]
    accuracy_by_decay: Dict[float, Optional[float]] = field(default_factory=dict)


Forward = Callable[[nn.Module, np.ndarray], torch.Tensor]


class BaselineService:
    """Сервис электронных моделей."""

    def __init__(self, config: Optional[BaselineConfig] = None, progress: bool = True):
        """
        Инициализация сервиса.

        Args:
            config: Конфигурация (lr 0.01, 10000 эпох, hidden 8, сетка weight decay)
            progress: Показывать прогресс-бар tqdm
        """
        self.config = config or BaselineConfig()
        self.progress = progress

    @staticmethod
    def _accuracy(model: nn.Module, forward: Forward, rows: np.ndarray, labels: torch.Tensor) -> Optional[float]:
        if rows.size == 0:
            return None
        with torch.no_grad():
            predictions = torch.argmax(forward(model, rows), dim=1)
        return float((predictions == labels[torch.from_numpy(rows)]).double().mean())

    def _train(
        self,
        build: Callable[[], nn.Module],
        forward: Forward,
        labels: np.ndarray,
        train_mask: np.ndarray,
        test_mask: Optional[np.ndarray],
        name: str
    ) -> BaselineResult:
        labels_t = torch.as_tensor(labels, dtype=torch.int64)
        train_rows = np.flatnonzero(train_mask)
        test_rows = np.flatnonzero(test_mask) if test_mask is not None else np.array([], dtype=np.int64)

        best: Optional[BaselineResult] = None
        by_decay: Dict[float, Optional[float]] = {}
        for decay in self.config.weight_decays:
            torch.manual_seed(self.config.seed)
            model = build()
            optimizer = torch.optim.Adam(model.parameters(), lr=self.config.learning_rate, weight_decay=decay)
            for _ in tqdm(range(self.config.epochs), desc=f"{name} wd={decay}", disable=not self.progress, leave=False):
                optimizer.zero_grad()
                loss = F.cross_entropy(forward(model, train_rows), labels_t[torch.from_numpy(train_rows)])
                loss.backward()
                optimizer.step()

            train_acc = self._accuracy(model, forward, train_rows, labels_t)
            test_acc = self._accuracy(model, forward, test_rows, labels_t)
            by_decay[decay] = test_acc
            score = test_acc if test_acc is not None else train_acc
            best_score = None if best is None else (best.test_accuracy if best.test_accuracy is not None else best.train_accuracy)
            if best is None or score > best_score:
                best = BaselineResult(model, decay, train_acc, test_acc)
            logger.debug(f"{name}: weight_decay={decay}, train={train_acc:.3f}, test={test_acc}")

        best.accuracy_by_decay = by_decay
        logger.info(f"📊 {name}: лучший weight_decay={best.weight_decay}, test={best.test_accuracy}")
        return best

    def fit_linear_on_pca(
        self, features: np.ndarray, labels: np.ndarray, train_mask: np.ndarray, test_mask: Optional[np.ndarray] = None
    ) -> BaselineResult:
        """
        Линейный softmax-классификатор на PCA-признаках.

        Args:
            features: PCA-признаки (n, d)
            labels: Метки
            train_mask: Маска обучения
            test_mask: Маска теста

        Returns:
            BaselineResult: Результат
        """
        x = torch.as_tensor(features, dtype=torch.float64)
        n_classes = int(labels.max()) + 1
        return self._train(
            lambda: LinearClassifier(x.shape[1], n_classes),
            lambda model, rows: model(x[torch.from_numpy(rows)]),
            labels, train_mask, test_mask, "PCA",
        )

    def fit_mlp(
        self, features: np.ndarray, labels: np.ndarray, train_mask: np.ndarray, test_mask: Optional[np.ndarray] = None
    ) -> BaselineResult:
        """MLP с одним скрытым слоем размера hidden."""
        x = torch.as_tensor(features, dtype=torch.float64)
        n_classes = int(labels.max()) + 1
        return self._train(
            lambda: MlpModel(x.shape[1], n_classes, self.config.hidden),
            lambda model, rows: model(x[torch.from_numpy(rows)]),
            labels, train_mask, test_mask, "MLP",
        )

    def fit_pprgo(
        self,
        features: np.ndarray,
        labels: np.ndarray,
        ppr: PprTable,
        variant: PprGoVariant,
        train_mask: np.ndarray,
        test_mask: Optional[np.ndarray] = None
    ) -> BaselineResult:
        """
        PPRGo: MLP-логиты узлов, сумма (S) или взвешенная сумма (WS) по top-k PageRank.

        Args:
            features: Признаки узлов
            labels: Метки
            ppr: Top-k таблица PageRank
            variant: sum или weighted_sum
            train_mask: Маска обучения
            test_mask: Маска теста

        Returns:
            BaselineResult: Результат
        """
        x = torch.as_tensor(features, dtype=torch.float64)
        indices = torch.from_numpy(ppr.indices)
        scores = torch.from_numpy(ppr.scores)
        n_classes = int(labels.max()) + 1
        variant = PprGoVariant(variant)
        return self._train(
            lambda: PprGoModel(x.shape[1], n_classes, self.config.hidden, variant),
            lambda model, rows: model(x, indices[torch.from_numpy(rows)], scores[torch.from_numpy(rows)]),
            labels, train_mask, test_mask, f"PPRGo-{'S' if variant == PprGoVariant.SUM else 'WS'}",
        )
