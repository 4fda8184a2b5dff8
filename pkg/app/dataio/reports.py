"""
Файлы отчетов: история, метрики, матрица ошибок, свипы, голосование, признаки.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from app.dataio.files import atomic_write_text, format_float
from app.train.history import TrainHistory

PathLike = Union[str, Path]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def write_table(path: PathLike, header: Sequence[str], rows: Sequence[Sequence[Any]], delimiter: str = "\t") -> Path:
    lines = [delimiter.join(header)]
    lines += [delimiter.join(_cell(v) for v in row) for row in rows]
    return atomic_write_text(path, "\n".join(lines) + "\n")


def write_history(history: TrainHistory, path: PathLike) -> Path:
    """history.tsv: epoch, loss, train_acc, test_acc."""
    rows = [(e.epoch, e.loss, e.train_accuracy, e.test_accuracy) for e in history.entries]
    return write_table(path, ("epoch", "loss", "train_acc", "test_acc"), rows)


def write_metrics(metrics: Dict[str, Any], path: PathLike) -> Path:
    """metrics.json с сортированными ключами."""
    return atomic_write_text(path, json.dumps(metrics, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Не сериализуется: {type(value)}")


def write_confusion(matrix: np.ndarray, class_names: Sequence[str], path: PathLike) -> Path:
    """Матрица ошибок: строки - истинный класс, столбцы - предсказанный."""
    rows = [[name] + [int(v) for v in row] for name, row in zip(class_names, matrix)]
    return write_table(path, ["true\\pred"] + list(class_names), rows)


def write_sweep(rows: List[Dict[str, Any]], path: PathLike) -> Path:
    """sweep.tsv: value, mean, std, repeats и точности моделей сравнения."""
    columns: List[str] = []
    for row in rows:
        columns += [key for key in row if key not in columns]
    return write_table(path, columns, [[row.get(c) for c in columns] for row in rows])


def write_features(intensities: np.ndarray, labels: Optional[np.ndarray], path: PathLike) -> Path:
    """CSV интенсивностей узлов: f0..f{d-1}, label."""
    intensities = np.asarray(intensities, dtype=np.float64)
    header = [f"f{i}" for i in range(intensities.shape[1])] + ["label"]
    labels = labels if labels is not None else -np.ones(intensities.shape[0], dtype=np.int64)
    rows = [list(row) + [int(label)] for row, label in zip(intensities, labels)]
    return write_table(path, header, rows, delimiter=",")


def read_features(path: PathLike):
    """Чтение CSV признаков: (матрица, метки)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()[1:]
    values = [line.split(",") for line in lines if line]
    matrix = np.array([[float(v) for v in row[:-1]] for row in values], dtype=np.float64)
    labels = np.array([int(row[-1]) for row in values], dtype=np.int64)
    return matrix, labels
