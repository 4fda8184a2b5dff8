"""
Чекпоинты модели: текстовый конверт `dgnn-ckpt v1`, JSON-тело и строка sha256.
"""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import torch
from loguru import logger

from app.core.exceptions import ConfigurationException, FormatException, HashMismatchException, VersionException
from app.dataio.files import atomic_write_text
from app.dataio.pca import FeatureTransform, prepare_features, target_range_for
from app.dgnn.model import DgnnModel
from app.photonics import CoefficientNoise, MetaAtomLut
from app.schemas.geometry import DpuGeometry

CHECKPOINT_HEADER = "dgnn-ckpt v1"
HASH_PREFIX = "sha256 "


@dataclass
class Checkpoint:
    """Загруженный чекпоинт."""

    model: DgnnModel
    train_config: Optional[Dict[str, Any]]
    content_hash: str
    feature_transform: Optional[FeatureTransform] = None
    split: Optional[Dict[str, Any]] = None

    def encode_attributes(self, attributes: np.ndarray) -> np.ndarray:
        """Атрибуты в диапазоне кодирования тем же преобразованием, что и при обучении."""
        if self.feature_transform is not None:
            return self.feature_transform.transform(attributes)
        logger.warning("⚠️ В чекпоинте нет преобразования признаков, PCA и min-max обучаются по всем узлам")
        return prepare_features(attributes, self.model.head_geometry.n_in, target_range_for(self.model.encoding))

    def test_mask(self, n_nodes: int) -> Optional[np.ndarray]:
        """Тестовые узлы разбиения, на котором обучалась модель; None, если разбиение не сохранено."""
        if self.split is None:
            return None
        if self.split["n_nodes"] != n_nodes:
            raise ConfigurationException(
                f"Разбиение чекпоинта задано для {self.split['n_nodes']} узлов, в графе {n_nodes}"
            )
        mask = np.zeros(n_nodes, dtype=bool)
        mask[np.asarray(self.split["test"], dtype=np.int64)] = True
        return mask


def _geometry(geometry: Optional[DpuGeometry]) -> Optional[Dict[str, Any]]:
    return geometry.model_dump() if geometry is not None else None


def model_to_dict(model: DgnnModel, train_config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Полное описание модели (JSON-совместимое)."""
    return {
        "geometry": {
            "head": _geometry(model.head_geometry),
            "readout": _geometry(model.readout_geometry),
            "classifier": _geometry(model.classifier_geometry),
        },
        "n_heads": model.n_heads,
        "n_classes": model.n_classes,
        "encoding": model.encoding.value,
        "classifier_kind": model.classifier_kind.value,
        "classifier_in": model.classifier.weight.shape[0] if model.classifier is not None else None,
        "top_k": model.top_k,
        "alpha": model.alpha,
        "binary": model.binary,
        "widths": {name: model.dpu_widths(name).detach().tolist() for name in model.dpu_names()},
        "classifier": (
            {"weight": model.classifier.weight.detach().tolist(), "bias": model.classifier.bias.detach().tolist()}
            if model.classifier is not None else None
        ),
        "noise": {
            name: {"phase": noise.phase.tolist(), "amplitude": noise.amplitude.tolist()}
            for name, noise in sorted(model.noise.items())
        },
        "lut": {
            "source": model.lut.source,
            "width_grid": model.lut.width_grid.tolist(),
            "phase": model.lut.phase_of_width.tolist(),
            "amplitude": model.lut.amplitude_of_width.tolist(),
        },
        "train_config": train_config,
    }


def model_from_dict(body: Dict[str, Any]) -> DgnnModel:
    """Восстановление модели из описания."""
    geometry = body["geometry"]
    lut_body = body["lut"]
    lut = MetaAtomLut(lut_body["width_grid"], lut_body["phase"], lut_body["amplitude"], source=lut_body["source"])
    model = DgnnModel(
        head_geometry=DpuGeometry(**geometry["head"]),
        n_heads=body["n_heads"],
        n_classes=body["n_classes"],
        lut=lut,
        encoding=body["encoding"],
        classifier_kind=body["classifier_kind"],
        classifier_geometry=DpuGeometry(**geometry["classifier"]) if geometry["classifier"] else None,
        readout_geometry=DpuGeometry(**geometry["readout"]) if geometry["readout"] else None,
        classifier_in=body["classifier_in"],
        top_k=body["top_k"],
        alpha=body["alpha"],
    )
    with torch.no_grad():
        for name, values in body["widths"].items():
            model.dpu_widths(name).copy_(torch.tensor(values, dtype=torch.float64))
        if body["classifier"] is not None:
            model.classifier.weight.copy_(torch.tensor(body["classifier"]["weight"], dtype=torch.float64))
            model.classifier.bias.copy_(torch.tensor(body["classifier"]["bias"], dtype=torch.float64))
    for name, noise in body["noise"].items():
        model.noise[name] = CoefficientNoise(
            phase=torch.tensor(noise["phase"], dtype=torch.float64),
            amplitude=torch.tensor(noise["amplitude"], dtype=torch.float64),
        )
    model.binary = bool(body["binary"])
    # DpuParams проверяет форму, диапазон и бинарность ширин
    for name in model.dpu_names():
        model.dpu_params(name)
    return model


def save_checkpoint(
    model: DgnnModel,
    path: Union[str, Path],
    train_config: Optional[Dict[str, Any]] = None,
    feature_transform: Optional[FeatureTransform] = None,
    test_mask: Optional[np.ndarray] = None
) -> str:
    """
    Сохранение чекпоинта.

    Args:
        model: Модель
        path: Путь к файлу
        train_config: Конфигурация обучения для справки
        feature_transform: Обученное преобразование атрибутов узлов
        test_mask: Тестовые узлы реализованного разбиения

    Returns:
        str: sha256 содержимого
    """
    body = model_to_dict(model, train_config)
    body["features"] = feature_transform.to_dict() if feature_transform is not None else None
    body["split"] = (
        {"n_nodes": int(len(test_mask)), "test": [int(i) for i in np.flatnonzero(test_mask)]}
        if test_mask is not None else None
    )
    content = f"{CHECKPOINT_HEADER}\n{json.dumps(body, sort_keys=True)}\n"
    digest = hashlib.sha256(content.encode("utf-8")).hexdigest()
    atomic_write_text(path, content + HASH_PREFIX + digest + "\n")
    logger.info(f"💾 Чекпоинт сохранен: {path}")
    return digest


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Загрузка чекпоинта с проверкой версии и хэша.

    Args:
        path: Путь к файлу

    Returns:
        Checkpoint: Модель, конфигурация обучения, хэш
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if not lines or lines[0] != CHECKPOINT_HEADER:
        header = lines[0] if lines else ""
        if header.startswith("dgnn-ckpt"):
            raise VersionException(f"Версия чекпоинта '{header}' не поддерживается")
        raise FormatException(f"ожидается заголовок '{CHECKPOINT_HEADER}'", str(path), 1)
    if len(lines) < 3 or not lines[2].startswith(HASH_PREFIX):
        raise FormatException("нет строки хэша", str(path), 3)

    content = f"{lines[0]}\n{lines[1]}\n"
    digest = hashlib.sha256(content.encode("utf-8")).hexdigest()
    if lines[2][len(HASH_PREFIX):].strip() != digest:
        raise HashMismatchException(f"Хэш чекпоинта {path} не совпадает с содержимым")

    try:
        body = json.loads(lines[1])
    except json.JSONDecodeError as e:
        raise FormatException(f"некорректный JSON: {e}", str(path), 2)
    model = model_from_dict(body)
    features = body.get("features")
    logger.info(f"📦 Чекпоинт загружен: {path}")
    return Checkpoint(
        model=model,
        train_config=body.get("train_config"),
        content_hash=digest,
        feature_transform=FeatureTransform.from_dict(features) if features else None,
        split=body.get("split"),
    )
