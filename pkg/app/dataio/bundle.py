"""
Текстовый формат графа (GraphBundle): meta.txt, edges.tsv, features.csv, labels.txt, split.txt.
"""

from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import scipy.sparse as sp
from loguru import logger

from app.core.exceptions import FormatException, NodeIdException, VersionException
from app.dataio.files import atomic_write_text, format_float
from app.graphs.graph import Graph, graph_from_edges

BUNDLE_VERSION = "1"
REQUIRED_META = ("version", "n_nodes", "n_attrs", "n_classes")


def _read_lines(path: Path) -> List[str]:
    if not path.exists():
        raise FormatException("файл отсутствует", str(path))
    return path.read_text(encoding="utf-8").splitlines()


def _parse_meta(path: Path) -> Dict[str, str]:
    meta = {}
    for number, line in enumerate(_read_lines(path), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatException("ожидается key=value", str(path), number)
        meta[key.strip()] = value.strip()
    missing = [key for key in REQUIRED_META if key not in meta]
    if missing:
        raise FormatException(f"нет ключей {', '.join(missing)}", str(path))
    if meta["version"] != BUNDLE_VERSION:
        raise VersionException(f"Версия bundle {meta['version']} не поддерживается (ожидается {BUNDLE_VERSION})")
    return meta


def _parse_int(value: str, path: Path, number: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise FormatException(f"не целое число '{value}'", str(path), number)


def _parse_edges(path: Path, n_nodes: int) -> np.ndarray:
    edges = []
    for number, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatException("ожидается два столбца", str(path), number)
        i, j = (_parse_int(p, path, number) for p in parts)
        if not (0 <= i < n_nodes and 0 <= j < n_nodes):
            raise NodeIdException(f"узел вне [0, {n_nodes})", str(path), number)
        edges.append((i, j))
    return np.asarray(edges, dtype=np.int64).reshape(-1, 2)


def _parse_features(path: Path, n_nodes: int, n_attrs: int) -> np.ndarray:
    rows = [line for line in _read_lines(path) if line.strip()]
    if len(rows) != n_nodes:
        raise FormatException(f"{len(rows)} строк признаков, ожидается {n_nodes}", str(path))
    features = np.empty((n_nodes, n_attrs), dtype=np.float64)
    for number, line in enumerate(rows, start=1):
        parts = line.split(",")
        if len(parts) != n_attrs:
            raise FormatException(f"{len(parts)} столбцов, ожидается {n_attrs}", str(path), number)
        try:
            features[number - 1] = [float(p) for p in parts]
        except ValueError:
            raise FormatException("нечисловое значение", str(path), number)
    return features


def _parse_labels(path: Path, n_nodes: int, n_classes: int) -> np.ndarray:
    rows = [line.strip() for line in _read_lines(path) if line.strip()]
    if len(rows) != n_nodes:
        raise FormatException(f"{len(rows)} меток, ожидается {n_nodes}", str(path))
    labels = np.array([_parse_int(v, path, i) for i, v in enumerate(rows, start=1)], dtype=np.int64)
    bad = np.flatnonzero((labels < -1) | (labels >= n_classes))
    if bad.size:
        raise FormatException(f"метка вне [-1, {n_classes})", str(path), int(bad[0]) + 1)
    return labels


def _parse_split(path: Path, n_nodes: int):
    train = np.zeros(n_nodes, dtype=bool)
    test = np.zeros(n_nodes, dtype=bool)
    if not path.exists():
        return train, test
    for number, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2 or parts[1] not in ("train", "test"):
            raise FormatException("ожидается '<node> train|test'", str(path), number)
        node = _parse_int(parts[0], path, number)
        if not 0 <= node < n_nodes:
            raise NodeIdException(f"узел вне [0, {n_nodes})", str(path), number)
        (train if parts[1] == "train" else test)[node] = True
    if np.any(train & test):
        raise FormatException("узел одновременно в train и test", str(path))
    return train, test


def load_graph_bundle(path: Union[str, Path]) -> Graph:
    """
    Загрузка графа из директории bundle.

    Обратные ребра добавляются, петли и дубликаты удаляются.

    Args:
        path: Директория bundle

    Returns:
        Graph: Граф с метками и разбиением
    """
    root = Path(path)
    meta = _parse_meta(root / "meta.txt")
    n_nodes = _parse_int(meta["n_nodes"], root / "meta.txt", 0)
    n_attrs = _parse_int(meta["n_attrs"], root / "meta.txt", 0)
    n_classes = _parse_int(meta["n_classes"], root / "meta.txt", 0)

    edges = _parse_edges(root / "edges.tsv", n_nodes)
    features = _parse_features(root / "features.csv", n_nodes, n_attrs)
    labels = _parse_labels(root / "labels.txt", n_nodes, n_classes)
    train_mask, test_mask = _parse_split(root / "split.txt", n_nodes)

    class_names = [c for c in meta.get("class_names", "").split(",") if c] or [str(c) for c in range(n_classes)]
    graph = graph_from_edges(
        n_nodes, edges, features,
        labels=labels, train_mask=train_mask, test_mask=test_mask, class_names=class_names,
    )
    if "n_edges" in meta and graph.n_edges != _parse_int(meta["n_edges"], root / "meta.txt", 0):
        raise FormatException(f"ребер {graph.n_edges}, в meta указано {meta['n_edges']}", str(root / "meta.txt"))

    logger.info(f"📂 Загружен граф {root.name}: {n_nodes} узлов, {graph.n_edges} ребер, {n_classes} классов")
    return graph


def save_graph_bundle(graph: Graph, path: Union[str, Path], class_names: Optional[List[str]] = None) -> Path:
    """
    Сохранение графа в директорию bundle (каждый файл пишется атомарно).

    Args:
        graph: Граф
        path: Директория
        class_names: Имена классов (по умолчанию из графа)

    Returns:
        Path: Директория bundle
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    labels = graph.labels if graph.labels is not None else -np.ones(graph.n_nodes, dtype=np.int64)
    names = class_names or graph.class_names or [str(c) for c in range(max(graph.n_classes, 1))]

    meta = [
        f"version={BUNDLE_VERSION}",
        f"n_nodes={graph.n_nodes}",
        f"n_attrs={graph.n_attrs}",
        f"n_classes={len(names)}",
        f"n_edges={graph.n_edges}",
        f"class_names={','.join(names)}",
    ]
    upper = sp.triu(graph.adjacency, k=1).tocoo()
    order = np.lexsort((upper.col, upper.row))
    rows, cols = upper.row[order], upper.col[order]
    edges = [f"{i}\t{j}" for i, j in zip(rows, cols)]
    features = [",".join(format_float(v) for v in row) for row in graph.attributes]
    atomic_write_text(root / "meta.txt", "\n".join(meta) + "\n")
    atomic_write_text(root / "edges.tsv", "".join(line + "\n" for line in edges))
    atomic_write_text(root / "features.csv", "\n".join(features) + "\n")
    atomic_write_text(root / "labels.txt", "".join(f"{int(v)}\n" for v in labels))
    write_split(graph.train_mask, graph.test_mask, root / "split.txt")

    logger.info(f"💾 Граф сохранен в {root} ({graph.n_nodes} узлов, {graph.n_edges} ребер)")
    return root


def write_split(train_mask: np.ndarray, test_mask: np.ndarray, path: Union[str, Path]) -> Path:
    """Запись разбиения в формате split.txt (`<узел> train|test`, по возрастанию узла)."""
    lines = [(int(i), "train") for i in np.flatnonzero(train_mask)]
    lines += [(int(i), "test") for i in np.flatnonzero(test_mask)]
    return atomic_write_text(path, "".join(f"{node} {role}\n" for node, role in sorted(lines)))
