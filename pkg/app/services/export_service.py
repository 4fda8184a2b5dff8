"""
Сервис выгрузки оптических признаков узлов.

Детектированные интенсивности |AGG|^2 всех узлов в CSV для внешних
инструментов визуализации (t-SNE и т.п.).
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np
import torch
from loguru import logger

from app.core.exceptions import ShapeException
from app.dataio.checkpoint import load_checkpoint
from app.dataio.reports import write_features
from app.dgnn.forward import node_features
from app.dgnn.model import DgnnModel
from app.graphs.graph import Graph
from app.graphs.ppr import graph_ppr_table
from config.settings import settings


def feature_matrix(model: DgnnModel, graph: Graph) -> np.ndarray:
    """
    Интенсивности признаков узлов (n_nodes, P*m).

    Args:
        model: Обученная модель (top_k и alpha берутся из нее)
        graph: Граф с атрибутами в диапазоне кодирования модели

    Returns:
        np.ndarray: Матрица интенсивностей
    """
    if graph.n_attrs != model.head_geometry.n_in:
        raise ShapeException(
            f"У графа {graph.n_attrs} атрибутов, головы модели ожидают {model.head_geometry.n_in}"
        )
    top_k = model.top_k or settings.TOP_K
    alpha = model.alpha or settings.PPR_ALPHA
    table = graph_ppr_table(graph, top_k, alpha, settings.PPR_BLOCK_SIZE)
    with torch.no_grad():
        features = node_features(graph, table, model)
    return features.intensities.cpu().numpy()


def export_features(checkpoint: Union[str, Path], graph: Graph, out_path: Union[str, Path], labels: Optional[np.ndarray] = None) -> Path:
    """
    Выгрузка признаков узлов по чекпоинту.

    Args:
        checkpoint: Путь к чекпоинту
        graph: Граф с исходными атрибутами (кодируются преобразованием из чекпоинта)
        out_path: Путь к CSV (f0..f{d-1}, label)
        labels: Метки для колонки label (по умолчанию метки графа)

    Returns:
        Path: Записанный файл
    """
    loaded = load_checkpoint(checkpoint)
    encoded = graph.with_attributes(loaded.encode_attributes(graph.attributes))
    matrix = feature_matrix(loaded.model, encoded)
    labels = labels if labels is not None else graph.labels
    path = write_features(matrix, labels, out_path)
    logger.info(f"📤 Признаки {matrix.shape[0]}x{matrix.shape[1]} выгружены в {path}")
    return path
