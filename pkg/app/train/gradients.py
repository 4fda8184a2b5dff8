"""
Градиенты DGNN по ширинам щелей и параметрам классификатора.

Вещественная функция потерь от комплексных промежуточных величин
дифференцируется autograd (сопряженные производные Виртингера), обновляются
только вещественные параметры.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
import torch
from loguru import logger

from app.core.exceptions import ConfigurationException, NumericException
from app.dgnn.model import DgnnModel
from app.photonics.lut import WIDTH_MAX, WIDTH_MIN
from app.schemas.training import LossKind
from app.train.batches import Batch
from app.train.losses import compute_loss


@dataclass
class GradientBundle:
    """Градиенты: ширины DPU (по имени DPU) и параметры классификатора."""

    loss: float
    d_widths: Dict[str, torch.Tensor]
    d_classifier: List[torch.Tensor]

    def max_abs(self) -> float:
        values = [g.abs().max().item() for g in list(self.d_widths.values()) + self.d_classifier if g.numel()]
        return max(values) if values else 0.0


def batch_loss(model: DgnnModel, batch: Batch, loss_kind: LossKind, l2_weight: float = 0.0) -> torch.Tensor:
    """Потеря на батче, L2 только по весам электронного классификатора."""
    loss = compute_loss(batch.outputs(model), batch.labels, loss_kind)
    if l2_weight > 0 and model.classifier is not None:
        loss = loss + l2_weight * (model.classifier.weight ** 2).sum()
    return loss


def _optical_names(model: DgnnModel) -> List[str]:
    return [name for name in model.dpu_names() if name != "classifier"]


def backward(model: DgnnModel, batch: Batch, loss_kind: LossKind, l2_weight: float = 0.0) -> GradientBundle:
    """
    Обратный проход: точные градиенты потери.

    Args:
        model: Модель
        batch: Батч
        loss_kind: Функция потерь
        l2_weight: Вес L2 классификатора

    Returns:
        GradientBundle: Градиенты той же формы, что параметры
    """
    loss = batch_loss(model, batch, loss_kind, l2_weight)
    if not torch.isfinite(loss):
        raise NumericException(f"Нечисловая потеря: {loss.item()}", provenance="loss")

    names = _optical_names(model)
    named = [(name, model.dpu_widths(name)) for name in names]
    named += [(f"classifier.{i}", p) for i, p in enumerate(model.classifier_parameters())]
    trainable = [(name, p) for name, p in named if p.requires_grad]

    grads = torch.autograd.grad(loss, [p for _, p in trainable], allow_unused=True) if trainable else []
    by_name = {name: torch.zeros_like(p) for name, p in named}
    for (name, param), grad in zip(trainable, grads):
        if grad is None:
            continue
        if not torch.all(torch.isfinite(grad)):
            raise NumericException("Нечисловой градиент", provenance=name)
        by_name[name] = grad

    return GradientBundle(
        loss=float(loss.item()),
        d_widths={name: by_name[name] for name in names},
        d_classifier=[by_name[f"classifier.{i}"] for i in range(len(model.classifier_parameters()))],
    )


@dataclass
class GradcheckReport:
    """Сравнение аналитических градиентов с центральными разностями."""

    entries: List[Tuple[str, int, int, float, float, float]] = field(default_factory=list)
    tolerance: float = 1e-4

    @property
    def max_rel_error(self) -> float:
        return max((e[5] for e in self.entries), default=0.0)

    @property
    def passed(self) -> bool:
        # знаменатель ошибки не меньше 1e-8: нулевой градиент проходит при |numeric| <= 1e-8 * tolerance
        return self.max_rel_error <= self.tolerance


def gradcheck(
    model: DgnnModel,
    batch: Batch,
    loss_kind: LossKind,
    samples: int = 100,
    h: float = 1e-2,
    seed: int = 0,
    tolerance: float = 1e-4
) -> GradcheckReport:
    """
    Проверка градиентов по ширинам конечными разностями.

    Ширины выбираются случайно среди всех DPU; относительная ошибка
    |analytic - numeric| / max(|analytic|, 1e-8).

    Args:
        model: Модель с непрерывными ширинами
        batch: Батч
        loss_kind: Функция потерь
        samples: Количество проверяемых ширин
        h: Шаг разности, нм
        seed: Зерно выбора
        tolerance: Допуск относительной ошибки

    Returns:
        GradcheckReport: Отчет по каждой ширине
    """
    if model.binary or model.straight_through:
        raise ConfigurationException("Проверка разностями требует непрерывных ширин")

    analytic = backward(model, batch, loss_kind)
    gradients = dict(analytic.d_widths)
    if model.classifier_widths is not None:
        gradients["classifier"] = analytic.d_classifier[0]

    candidates = []
    for name in gradients:
        widths = model.dpu_widths(name).detach()
        layers, groups = np.nonzero(((widths > WIDTH_MIN + h) & (widths < WIDTH_MAX - h)).cpu().numpy())
        candidates += [(name, int(l), int(g)) for l, g in zip(layers, groups)]

    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(candidates), size=min(samples, len(candidates)), replace=False)

    report = GradcheckReport(tolerance=tolerance)
    with torch.no_grad():
        for index in sorted(chosen):
            name, layer, group = candidates[index]
            widths = model.dpu_widths(name)
            original = widths[layer, group].item()
            widths[layer, group] = original + h
            plus = batch_loss(model, batch, loss_kind).item()
            widths[layer, group] = original - h
            minus = batch_loss(model, batch, loss_kind).item()
            widths[layer, group] = original

            numeric = (plus - minus) / (2 * h)
            value = gradients[name][layer, group].item()
            error = abs(value - numeric) / max(abs(value), 1e-8)
            report.entries.append((name, layer, group, value, numeric, error))

    logger.info(f"🔍 Проверка градиентов: {len(report.entries)} ширин, max rel error = {report.max_rel_error:.2e}")
    return report
