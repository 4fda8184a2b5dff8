"""
Нормированная смежность и персонализированный PageRank (точное решение).
"""

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from loguru import logger

from app.core.exceptions import DomainException, NumericException
from app.graphs.graph import Graph, PprTable


def normalized_adjacency(graph: Graph) -> sp.csr_matrix:
    """
    Симметрично нормированная смежность с петлями: (D+I)^-1/2 (A+I) (D+I)^-1/2.

    Args:
        graph: Граф

    Returns:
        sp.csr_matrix: Разреженная матрица Ã
    """
    n = graph.n_nodes
    with_loops = graph.adjacency + sp.identity(n, format="csr", dtype=np.float64)
    degrees = np.asarray(with_loops.sum(axis=1)).ravel()
    scale = sp.diags(1.0 / np.sqrt(degrees))
    return (scale @ with_loops @ scale).tocsr()


def _validate_alpha(alpha: float) -> None:
    if not 0 < alpha <= 1:
        raise DomainException(f"alpha должно лежать в (0, 1], получено {alpha}")


def _system_matrix(a_norm, alpha: float) -> np.ndarray:
    a_dense = a_norm.toarray() if sp.issparse(a_norm) else np.asarray(a_norm, dtype=np.float64)
    return np.eye(a_dense.shape[0]) - (1.0 - alpha) * a_dense


def ppr_exact(a_norm, alpha: float) -> np.ndarray:
    """
    Матрица PageRank Π = alpha * (I - (1 - alpha) Ã)^-1 плотным решением.

    Args:
        a_norm: Нормированная смежность (плотная или разреженная)
        alpha: Вероятность телепортации

    Returns:
        np.ndarray: Плотная матрица Π
    """
    _validate_alpha(alpha)
    system = _system_matrix(a_norm, alpha)
    try:
        pi = alpha * scipy.linalg.solve(system, np.eye(system.shape[0]), assume_a="sym")
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise NumericException(f"Система PageRank вырождена: {e}", provenance="ppr_exact")
    if not np.all(np.isfinite(pi)):
        raise NumericException("Матрица PageRank содержит нечисловые значения", provenance="ppr_exact")
    return pi


def _topk_rows(block: np.ndarray, k: int):
    # stable-сортировка по -score: при равенстве выигрывает меньший индекс
    order = np.argsort(-block, axis=1, kind="stable")[:, :k]
    scores = np.take_along_axis(block, order, axis=1)
    return order, np.maximum(scores, 0.0)


def topk_neighbors(pi: np.ndarray, k: int) -> PprTable:
    """
    Top-k соседей каждой строки Π по убыванию оценки.

    Args:
        pi: Матрица PageRank (n, n)
        k: Количество соседей

    Returns:
        PprTable: Индексы и оценки
    """
    pi = np.asarray(pi, dtype=np.float64)
    n = pi.shape[0]
    if not 1 <= k <= n:
        raise DomainException(f"k должно лежать в [1, {n}], получено {k}")
    indices, scores = _topk_rows(pi, k)
    return PprTable.from_arrays(indices, scores)


def ppr_topk(a_norm, alpha: float, k: int, block_size: int = 2048) -> PprTable:
    """
    Top-k PageRank без хранения полной Π: разложение Холецкого и решение блоками столбцов.

    Π симметрична, поэтому блок столбцов совпадает с блоком строк.

    Args:
        a_norm: Нормированная смежность
        alpha: Вероятность телепортации
        k: Количество соседей
        block_size: Столбцов в одном блоке

    Returns:
        PprTable: То же, что topk_neighbors(ppr_exact(a_norm, alpha), k)
    """
    _validate_alpha(alpha)
    system = _system_matrix(a_norm, alpha)
    n = system.shape[0]
    if not 1 <= k <= n:
        raise DomainException(f"k должно лежать в [1, {n}], получено {k}")

    try:
        factor = scipy.linalg.cho_factor(system, lower=True)
    except scipy.linalg.LinAlgError as e:
        raise NumericException(f"Разложение Холецкого не удалось: {e}", provenance="ppr_topk")

    indices = np.empty((n, k), dtype=np.int64)
    scores = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, block_size):
        stop = min(start + block_size, n)
        rhs = np.zeros((n, stop - start))
        rhs[np.arange(start, stop), np.arange(stop - start)] = 1.0
        block = alpha * scipy.linalg.cho_solve(factor, rhs)
        if not np.all(np.isfinite(block)):
            raise NumericException("Блок PageRank содержит нечисловые значения", provenance="ppr_topk")
        indices[start:stop], scores[start:stop] = _topk_rows(block.T, k)

    logger.debug(f"🔗 PPR top-{k} посчитан для {n} узлов (alpha={alpha})")
    return PprTable.from_arrays(indices, scores)


def graph_ppr_table(graph: Graph, k: int, alpha: float, block_size: int = 2048) -> PprTable:
    """Top-k PageRank графа; k ограничивается числом узлов."""
    return ppr_topk(normalized_adjacency(graph), alpha, min(k, graph.n_nodes), block_size)
