"""
Батчи обучения: узлы графа и окна скелетных последовательностей.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
import torch

from app.dgnn.action import forward_action
from app.dgnn.encoding import encode_attributes
from app.dgnn.forward import forward_nodes
from app.dgnn.model import DgnnModel
from app.graphs.graph import Graph, NeighborTable


@dataclass(eq=False)
class NodeBatch:
    """Узлы rows графа: закодированные атрибуты всех узлов и таблица соседей."""

    encoded: torch.Tensor
    table: NeighborTable
    rows: np.ndarray
    labels: torch.Tensor

    @classmethod
    def from_mask(cls, graph: Graph, table: NeighborTable, model: DgnnModel, mask: np.ndarray) -> "NodeBatch":
        rows = np.flatnonzero(mask)
        return cls(
            encoded=encode_attributes(graph.attributes, model.encoding),
            table=table,
            rows=rows,
            labels=torch.as_tensor(graph.labels[rows], dtype=torch.int64),
        )

    def __len__(self) -> int:
        return int(self.rows.size)

    def subset(self, index: np.ndarray) -> "NodeBatch":
        return NodeBatch(
            encoded=self.encoded, table=self.table, rows=self.rows[index], labels=self.labels[torch.from_numpy(index)]
        )

    def outputs(self, model: DgnnModel) -> torch.Tensor:
        return forward_nodes(self.encoded, self.table, model, self.rows)


@dataclass(eq=False)
class SequenceBatch:
    """Окна кадров (B, n, 20, 3) и метки действий."""

    windows: np.ndarray
    labels: torch.Tensor

    def __len__(self) -> int:
        return int(self.windows.shape[0])

    def subset(self, index: np.ndarray) -> "SequenceBatch":
        return SequenceBatch(windows=self.windows[index], labels=self.labels[torch.from_numpy(index)])

    def outputs(self, model: DgnnModel) -> torch.Tensor:
        return forward_action(self.windows, model)


Batch = Union[NodeBatch, SequenceBatch]
