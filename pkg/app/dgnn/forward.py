"""
Прямой проход DGNN: MSG, AGG, детектирование, классификаторы и read-out.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

from app.core.exceptions import ConfigurationException, ShapeException
from app.dgnn.encoding import encode_attributes
from app.dgnn.model import DgnnModel
from app.graphs.graph import Graph, NeighborTable
from app.photonics import aggregate_tree, transfer_matrix, tree_depth, y_couple
from app.schemas.experiment import ClassifierKind


@dataclass(frozen=True, eq=False)
class NodeFeatures:
    """Оптические признаки узлов (n, P*m) до и после детектирования."""

    complex_features: torch.Tensor
    intensities: torch.Tensor


def detect(features: torch.Tensor) -> torch.Tensor:
    """Фотодетектирование: |z|^2."""
    return features.real ** 2 + features.imag ** 2


def messages(encoded: torch.Tensor, model: DgnnModel) -> torch.Tensor:
    """
    MSG всех голов для закодированных входов.

    Args:
        encoded: Комплексные входы (..., n_in)
        model: Модель

    Returns:
        torch.Tensor: (..., P, m)
    """
    if encoded.shape[-1] != model.head_geometry.n_in:
        raise ShapeException(
            f"Размерность атрибутов {encoded.shape[-1]} не совпадает с n_in={model.head_geometry.n_in}"
        )
    # dpu_forward линеен, поэтому x @ M совпадает с прогоном каждого входа
    heads = [encoded @ transfer_matrix(model.head_params(p), model.lut) for p in range(model.n_heads)]
    return torch.stack(heads, dim=-2)


def msg_all(graph: Graph, model: DgnnModel) -> torch.Tensor:
    """Сообщения всех узлов: (n_nodes, P, m)."""
    return messages(encode_attributes(graph.attributes, model.encoding), model)


def agg_node(node_messages: torch.Tensor, table: NeighborTable, node_id: int) -> torch.Tensor:
    """AGG одного узла: дерево Y-разветвителей по его соседям, (P, m)."""
    neighbors = torch.from_numpy(table.neighbors(node_id))
    return aggregate_tree(node_messages[neighbors])


def aggregate_all(node_messages: torch.Tensor, table: NeighborTable, rows: Optional[np.ndarray] = None) -> torch.Tensor:
    """
    AGG для всех (или выбранных) узлов, ось узлов -3.

    Args:
        node_messages: Сообщения (..., n, P, m)
        table: Таблица соседей
        rows: Узлы, для которых нужна агрегация (по умолчанию все)

    Returns:
        torch.Tensor: (..., len(rows), P, m); совпадает с agg_node построчно
    """
    indices, mask = table.indices, table.mask
    if rows is not None:
        indices, mask = indices[rows], mask[rows]

    gathered = node_messages[..., torch.from_numpy(indices), :, :]
    valid = torch.from_numpy(mask).to(gathered.dtype)[..., None, None]
    level = gathered * valid

    depths = np.array([tree_depth(int(c)) for c in mask.sum(axis=1)])
    full_depth = int(depths.max())
    width = 2 ** full_depth
    if width > level.shape[-3]:
        pad_shape = level.shape[:-3] + (width - level.shape[-3],) + level.shape[-2:]
        level = torch.cat([level, level.new_zeros(pad_shape)], dim=-3)
    elif width < level.shape[-3]:
        level = level[..., :width, :, :]

    while level.shape[-3] > 1:
        level = y_couple(level[..., 0::2, :, :], level[..., 1::2, :, :])
    result = level[..., 0, :, :]

    if np.any(depths != full_depth):
        # строки с меньшим деревом прошли лишние уровни
        correction = torch.from_numpy(2.0 ** ((full_depth - depths) / 2.0))
        result = result * correction.to(result.dtype)[:, None, None]
    return result


def node_features(
    graph: Graph, table: NeighborTable, model: DgnnModel, rows: Optional[np.ndarray] = None
) -> NodeFeatures:
    """Агрегированные признаки узлов и их интенсивности."""
    aggregated = aggregate_all(msg_all(graph, model), table, rows)
    complex_features = aggregated.reshape(aggregated.shape[0], -1)
    return NodeFeatures(complex_features=complex_features, intensities=detect(complex_features))


def classify_features(complex_features: torch.Tensor, model: DgnnModel) -> torch.Tensor:
    """Классификатор по признакам (..., P*m): logits (DGNN-E) или интенсивности детекторов (DGNN-O)."""
    if model.classifier_kind == ClassifierKind.ELECTRONIC:
        return model.classifier(detect(complex_features))
    classifier = transfer_matrix(model.classifier_params(), model.lut)
    return detect(complex_features @ classifier)


def forward_nodes(
    encoded: torch.Tensor, table: NeighborTable, model: DgnnModel, rows: Optional[np.ndarray] = None
) -> torch.Tensor:
    """Выходы классификатора для узлов rows по закодированным атрибутам всех узлов."""
    aggregated = aggregate_all(messages(encoded, model), table, rows)
    return classify_features(aggregated.reshape(aggregated.shape[0], -1), model)


def forward_dgnn_e(graph: Graph, table: NeighborTable, model: DgnnModel, rows: Optional[np.ndarray] = None) -> torch.Tensor:
    """DGNN-E: logits = |AGG|^2 @ W + b."""
    if model.classifier_kind != ClassifierKind.ELECTRONIC:
        raise ConfigurationException("forward_dgnn_e требует электронный классификатор")
    return forward_nodes(encode_attributes(graph.attributes, model.encoding), table, model, rows)


def forward_dgnn_o(graph: Graph, table: NeighborTable, model: DgnnModel, rows: Optional[np.ndarray] = None) -> torch.Tensor:
    """DGNN-O: комплексные AGG напрямую в классификационный DPU, на выходе интенсивности детекторов."""
    if model.classifier_kind != ClassifierKind.OPTICAL:
        raise ConfigurationException("forward_dgnn_o требует классификационный DPU")
    return forward_nodes(encode_attributes(graph.attributes, model.encoding), table, model, rows)


def predict(outputs: torch.Tensor) -> np.ndarray:
    """argmax по классам; при равенстве - меньший индекс."""
    return torch.argmax(outputs.detach(), dim=-1).cpu().numpy()


def readout_graph(features: torch.Tensor, model: DgnnModel) -> torch.Tensor:
    """
    Read-out графа: DPU 2x2 каждой головы на признак узла, затем дерево по всем узлам.

    Args:
        features: Комплексные признаки узлов (..., n_nodes, P, m)
        model: Модель с read-out DPU

    Returns:
        torch.Tensor: Признак графа (..., P*m)
    """
    if not model.has_readout:
        raise ConfigurationException("Read-out требует read-out DPU")
    readouts = torch.stack([transfer_matrix(model.readout_params(p), model.lut) for p in range(model.n_heads)])
    mapped = torch.einsum("...npi,pio->...npo", features, readouts)
    pooled = aggregate_tree(mapped.movedim(-3, 0))
    return pooled.reshape(pooled.shape[:-2] + (-1,))
