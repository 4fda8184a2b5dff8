"""
Y-разветвители 50:50 и дерево оптической агрегации.
"""

import math

import torch

from app.core.exceptions import DomainException

SQRT2 = math.sqrt(2.0)


def y_couple(a, b):
    """Y-разветвитель: (a + b) / sqrt(2)."""
    return (a + b) / SQRT2


def tree_depth(k: int) -> int:
    """Глубина сбалансированного дерева для k листьев."""
    if k < 1:
        raise DomainException("Дерево агрегации требует хотя бы один лист")
    return (k - 1).bit_length()


def tree_scale(k: int) -> float:
    """Множитель дерева: выход = sum(листьев) * tree_scale(k)."""
    return 2.0 ** (-tree_depth(k) / 2.0)


def aggregate_tree(message_set) -> torch.Tensor:
    """
    Попарная агрегация k сообщений деревом Y-разветвителей.

    Args:
        message_set: Матрица (k, m) комплексных сообщений

    Returns:
        torch.Tensor: Вектор (m,) = sum / 2^(d/2), d = ceil(log2 k)
    """
    level = torch.as_tensor(message_set)
    if level.ndim < 1 or level.shape[0] < 1:
        raise DomainException("Пустой набор сообщений для агрегации")

    depth = tree_depth(level.shape[0])
    leaves = 2 ** depth
    if leaves > level.shape[0]:
        padding = level.new_zeros((leaves - level.shape[0],) + tuple(level.shape[1:]))
        level = torch.cat([level, padding], dim=0)

    while level.shape[0] > 1:
        level = y_couple(level[0::2], level[1::2])
    return level[0]
