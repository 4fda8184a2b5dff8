"""
Разбиения узлов на train/test: случайные и индуктивные.
"""

from typing import Optional, Tuple

import numpy as np
from dataclasses import replace
from loguru import logger

from app.core.exceptions import DomainException
from app.graphs.graph import Graph


def random_split(
    labels: np.ndarray,
    seed: int,
    n_test: Optional[int] = None,
    labels_per_class: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Случайное разбиение размеченных узлов.

    Если задан n_test: n_test случайных узлов идут в test, train - остальные
    (или по labels_per_class из остальных на класс). Иначе train - по
    labels_per_class на класс, test - все остальные размеченные.

    Args:
        labels: Метки узлов (-1 для неразмеченных)
        seed: Зерно генератора
        n_test: Размер тестового множества
        labels_per_class: Меток на класс в train

    Returns:
        Tuple[np.ndarray, np.ndarray]: Маски train и test
    """
    labels = np.asarray(labels, dtype=np.int64)
    if n_test is None and labels_per_class is None:
        raise DomainException("Нужно задать n_test или labels_per_class")

    rng = np.random.default_rng(seed)
    labeled = np.flatnonzero(labels >= 0)
    order = rng.permutation(labeled)
    train_mask = np.zeros(labels.size, dtype=bool)
    test_mask = np.zeros(labels.size, dtype=bool)

    pool = order
    if n_test is not None:
        if not 0 < n_test < labeled.size:
            raise DomainException(f"n_test={n_test} вне (0, {labeled.size})")
        test_mask[order[:n_test]] = True
        pool = order[n_test:]

    if labels_per_class is None:
        train_mask[pool] = True
    else:
        for c in np.unique(labels[labeled]):
            members = pool[labels[pool] == c]
            if members.size < labels_per_class:
                raise DomainException(f"В классе {c} меньше {labels_per_class} доступных узлов")
            train_mask[members[:labels_per_class]] = True
        if n_test is None:
            test_mask[labeled] = True
            test_mask[train_mask] = False

    return train_mask, test_mask


def make_inductive(graph: Graph, test_ids) -> Tuple[Graph, Graph]:
    """
    Индуктивный режим: удаление тестовых узлов вместе с их ребрами.

    Args:
        graph: Полный граф
        test_ids: Индексы удаляемых узлов

    Returns:
        Tuple[Graph, Graph]: (граф для обучения с пересчитанными индексами, исходный граф)
    """
    test_ids = np.unique(np.asarray(list(test_ids), dtype=np.int64))
    if test_ids.size and (test_ids.min() < 0 or test_ids.max() >= graph.n_nodes):
        raise DomainException("Неизвестные идентификаторы тестовых узлов")
    if test_ids.size == 0:
        return graph, graph

    keep = np.ones(graph.n_nodes, dtype=bool)
    keep[test_ids] = False
    kept = np.flatnonzero(keep)

    train_graph = replace(
        graph,
        adjacency=graph.adjacency[kept][:, kept],
        attributes=graph.attributes[kept],
        labels=graph.labels[kept] if graph.labels is not None else None,
        train_mask=graph.train_mask[kept],
        test_mask=np.zeros(kept.size, dtype=bool),
        node_ids=graph.node_ids[kept],
    )
    logger.info(f"✂️ Индуктивный граф: удалено {test_ids.size} узлов, осталось {kept.size}")
    return train_graph, graph
