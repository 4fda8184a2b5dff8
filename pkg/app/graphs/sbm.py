"""
Синтетические графы стохастической блочной модели (SBM).
"""

from typing import Optional

import networkx as nx
import numpy as np
from loguru import logger
from sklearn.preprocessing import MinMaxScaler

from app.core.exceptions import DomainException
from app.graphs.graph import Graph, graph_from_edges

DEFAULT_ATTR_STD = 0.15


def default_attr_means(n_classes: int, n_attrs: int) -> np.ndarray:
    """Средние атрибутов классов: 0.8 * one-hot(class) + 0.1."""
    means = np.full((n_classes, n_attrs), 0.1)
    for c in range(n_classes):
        means[c, c % n_attrs] += 0.8
    return means


def generate_sbm(
    n: int,
    n_classes: int,
    p: float,
    q: float,
    seed: int,
    attr_means: Optional[np.ndarray] = None,
    attr_std: float = DEFAULT_ATTR_STD,
    n_attrs: Optional[int] = None
) -> Graph:
    """
    Генерация графа SBM с гауссовыми атрибутами классов.

    Args:
        n: Количество узлов
        n_classes: Количество классов (равные сообщества)
        p: Вероятность ребра внутри класса
        q: Вероятность ребра между классами
        seed: Зерно генератора
        attr_means: Средние атрибутов (n_classes, n_attrs)
        attr_std: Стандартное отклонение (изотропное) или матрица ковариации
        n_attrs: Размерность атрибутов, если attr_means не заданы (по умолчанию n_classes)

    Returns:
        Graph: Граф с метками, атрибуты нормированы в [0, 1] по столбцам
    """
    if not (0.0 <= q <= p <= 1.0):
        raise DomainException(f"Требуется 0 <= q <= p <= 1, получено p={p}, q={q}")
    if n_classes < 1 or n % n_classes != 0:
        raise DomainException(f"{n} узлов нельзя разбить на {n_classes} равных сообществ")

    size = n // n_classes
    probs = np.full((n_classes, n_classes), q)
    np.fill_diagonal(probs, p)
    nx_graph = nx.stochastic_block_model([size] * n_classes, probs.tolist(), seed=seed, sparse=True)
    labels = np.repeat(np.arange(n_classes), size)

    if attr_means is None:
        attr_means = default_attr_means(n_classes, n_attrs or n_classes)
    attr_means = np.asarray(attr_means, dtype=np.float64)
    if attr_means.shape[0] != n_classes:
        raise DomainException("Количество средних атрибутов не совпадает с числом классов")

    rng = np.random.default_rng(seed)
    dim = attr_means.shape[1]
    covariance = np.asarray(attr_std, dtype=np.float64)
    if covariance.ndim == 0:
        noise = rng.normal(0.0, float(covariance), size=(n, dim))
    else:
        noise = rng.multivariate_normal(np.zeros(dim), covariance, size=n)
    attributes = MinMaxScaler().fit_transform(attr_means[labels] + noise)

    graph = graph_from_edges(n, sorted(nx_graph.edges()), attributes, labels=labels)
    logger.info(f"🧪 SBM: {n} узлов, {graph.n_edges} ребер, {n_classes} классов (p={p}, q={q}, seed={seed})")
    return graph
