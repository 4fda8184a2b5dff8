"""
Распознавание действий по скелету: признаки подпоследовательностей кадров.
"""

from functools import lru_cache

import numpy as np
import torch

from app.core.exceptions import DomainException, ShapeException
from app.dgnn.encoding import encode_attributes
from app.dgnn.forward import aggregate_all, detect, messages, readout_graph
from app.dgnn.model import DgnnModel
from app.graphs.graph import NeighborTable
from app.graphs.skeleton import N_JOINTS, skeleton_neighbors


@lru_cache(maxsize=1)
def _skeleton_table() -> NeighborTable:
    return skeleton_neighbors()


def subsequence_windows(sequence, n: int, stride: int = 1) -> np.ndarray:
    """
    Окна из n подряд идущих кадров.

    Args:
        sequence: Кадры (T, 20, 3)
        n: Кадров в окне
        stride: Шаг между началами окон

    Returns:
        np.ndarray: (W, n, 20, 3)
    """
    frames = np.asarray(sequence, dtype=np.float64)
    if frames.ndim != 3 or frames.shape[1:] != (N_JOINTS, 3):
        raise ShapeException(f"Ожидаются кадры (T, {N_JOINTS}, 3), получено {frames.shape}")
    if frames.shape[0] < n:
        raise DomainException(f"Последовательность из {frames.shape[0]} кадров короче окна {n}")
    starts = range(0, frames.shape[0] - n + 1, stride)
    return np.stack([frames[s:s + n] for s in starts])


def subsequence_features(windows, model: DgnnModel) -> torch.Tensor:
    """
    Признаки окон: MSG по координатам суставов, AGG по костям, read-out, детектирование.

    Args:
        windows: Окна (B, n, 20, 3), координаты в диапазоне кодирования
        model: Модель с read-out DPU

    Returns:
        torch.Tensor: (B, n * P * m) вещественные интенсивности
    """
    encoded = encode_attributes(windows, model.encoding)
    node_messages = messages(encoded, model)
    aggregated = aggregate_all(node_messages, _skeleton_table())
    graph_features = readout_graph(aggregated, model)
    intensities = detect(graph_features)
    return intensities.reshape(intensities.shape[0], -1)


def subsequence_pipeline(sequence, model: DgnnModel, n: int, stride: int = 1) -> torch.Tensor:
    """Признаки всех окон одной последовательности: (W, n * P * m)."""
    return subsequence_features(subsequence_windows(sequence, n, stride), model)


def forward_action(windows, model: DgnnModel) -> torch.Tensor:
    """Logits классов действий для окон."""
    return model.classifier(subsequence_features(windows, model))
