"""
Структуры данных графов: граф с атрибутами, таблицы соседей для агрегации.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from app.core.exceptions import DomainException, ShapeException


@dataclass(eq=False)
class Graph:
    """
    Неориентированный граф с атрибутами узлов.

    Смежность A симметрична, бинарна и без петель. labels = -1 для неразмеченных узлов.
    node_ids хранит исходные идентификаторы узлов (после удаления узлов в индуктивном режиме).
    """

    adjacency: sp.csr_matrix
    attributes: np.ndarray
    labels: Optional[np.ndarray] = None
    train_mask: Optional[np.ndarray] = None
    test_mask: Optional[np.ndarray] = None
    node_ids: Optional[np.ndarray] = None
    class_names: list = field(default_factory=list)

    def __post_init__(self):
        adjacency = sp.csr_matrix(self.adjacency, dtype=np.float64)
        adjacency.sum_duplicates()
        adjacency.eliminate_zeros()
        n = adjacency.shape[0]
        if adjacency.shape != (n, n):
            raise ShapeException(f"Матрица смежности не квадратная: {adjacency.shape}")
        if adjacency.nnz and not np.all(adjacency.data == 1.0):
            raise DomainException("Матрица смежности должна быть бинарной")
        if adjacency.diagonal().any():
            raise DomainException("Петли в матрице смежности не хранятся")
        if (adjacency != adjacency.T).nnz:
            raise DomainException("Матрица смежности должна быть симметричной")
        self.adjacency = adjacency

        self.attributes = np.asarray(self.attributes, dtype=np.float64)
        if self.attributes.ndim != 2 or self.attributes.shape[0] != n:
            raise ShapeException(f"Матрица атрибутов {self.attributes.shape} не соответствует {n} узлам")

        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (n,):
                raise ShapeException("Длина вектора меток не равна числу узлов")
        self.train_mask = self._mask(self.train_mask, n)
        self.test_mask = self._mask(self.test_mask, n)
        if np.any(self.train_mask & self.test_mask):
            raise DomainException("Маски train и test пересекаются")
        if self.node_ids is None:
            self.node_ids = np.arange(n)

    @staticmethod
    def _mask(mask: Optional[np.ndarray], n: int) -> np.ndarray:
        if mask is None:
            return np.zeros(n, dtype=bool)
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (n,):
            raise ShapeException("Длина маски не равна числу узлов")
        return mask

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def n_attrs(self) -> int:
        return self.attributes.shape[1]

    @property
    def n_edges(self) -> int:
        """Количество неориентированных ребер."""
        return self.adjacency.nnz // 2

    @property
    def n_classes(self) -> int:
        if self.class_names:
            return len(self.class_names)
        if self.labels is None or not np.any(self.labels >= 0):
            return 0
        return int(self.labels.max()) + 1

    def with_split(self, train_mask: np.ndarray, test_mask: np.ndarray) -> "Graph":
        return replace(self, train_mask=train_mask, test_mask=test_mask)

    def with_attributes(self, attributes: np.ndarray) -> "Graph":
        return replace(self, attributes=attributes)


def graph_from_edges(n_nodes: int, edges, attributes: np.ndarray, **kwargs) -> Graph:
    """
    Построить граф из списка ребер: добавляет обратные ребра, убирает петли и дубликаты.

    Args:
        n_nodes: Количество узлов
        edges: Итерируемое пар (i, j)
        attributes: Матрица атрибутов (n_nodes, n_attrs)
        **kwargs: Остальные поля Graph

    Returns:
        Graph: Граф
    """
    edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    edges = edges[edges[:, 0] != edges[:, 1]]
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adjacency = sp.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n_nodes, n_nodes)).tocsr()
    adjacency.data[:] = 1.0
    return Graph(adjacency=adjacency, attributes=attributes, **kwargs)


@dataclass(eq=False)
class NeighborTable:
    """
    Таблица соседей для агрегации: индексы (n, k_max) и маска валидности.

    Соседи в каждой строке идут в порядке агрегации.
    """

    indices: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.indices.shape != self.mask.shape or self.indices.ndim != 2:
            raise ShapeException("Индексы и маска таблицы соседей разной формы")
        if np.any(self.mask.sum(axis=1) < 1):
            raise DomainException("У каждого узла должен быть хотя бы один сосед для агрегации")

    @property
    def n_nodes(self) -> int:
        return self.indices.shape[0]

    def neighbors(self, node: int) -> np.ndarray:
        return self.indices[node][self.mask[node]]

    def counts(self) -> np.ndarray:
        return self.mask.sum(axis=1)


@dataclass(eq=False)
class PprTable(NeighborTable):
    """Top-k соседей по персонализированному PageRank и их оценки (по убыванию)."""

    scores: np.ndarray = None

    def __post_init__(self):
        super().__post_init__()
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.scores.shape != self.indices.shape:
            raise ShapeException("Форма оценок не совпадает с формой индексов")
        if np.any(self.scores < 0):
            raise DomainException("Оценки PageRank должны быть неотрицательными")
        if np.any(np.diff(self.scores, axis=1) > 0):
            raise DomainException("Оценки в строке должны не возрастать")
        for row in self.indices:
            if np.unique(row).size != row.size:
                raise DomainException("Индексы соседей в строке должны быть уникальными")

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    @classmethod
    def from_arrays(cls, indices: np.ndarray, scores: np.ndarray) -> "PprTable":
        return cls(indices=indices, mask=np.ones_like(indices, dtype=bool), scores=scores)
