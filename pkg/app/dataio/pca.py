"""
PCA-сжатие атрибутов и масштабирование в диапазон кодирования.

Обученное преобразование (компоненты PCA, параметры min-max) сохраняется
в чекпоинте, чтобы оценка и выгрузка признаков видели те же входы, что и обучение.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from loguru import logger
from sklearn.decomposition import PCA
from sklearn.preprocessing import MinMaxScaler

from app.core.exceptions import DomainException, ShapeException
from app.schemas.experiment import Encoding

TARGET_RANGES = {
    "unit": (0.0, 1.0),
    "two_pi": (0.0, 2.0 * math.pi),
}

FIT_ALL = "all_nodes"
FIT_ROWS = "fit_rows"


def target_range_for(encoding: Union[Encoding, str]) -> str:
    """amplitude -> unit, phase -> two_pi."""
    return "two_pi" if Encoding(encoding) == Encoding.PHASE else "unit"


def _check_range(target_range: str) -> None:
    if target_range not in TARGET_RANGES:
        raise DomainException(f"Неизвестный диапазон: {target_range}")


@dataclass
class FeatureTransform:
    """
    Обученное преобразование атрибутов: проекция PCA (необязательна) и min-max.

    x -> clip(((x - mean) @ components.T) * scale + offset, target_range)
    """

    target_range: str
    scale: np.ndarray
    offset: np.ndarray
    components: Optional[np.ndarray] = None
    mean: Optional[np.ndarray] = None
    explained_variance_ratio: Optional[np.ndarray] = None
    fit_mode: str = FIT_ALL

    @property
    def n_in(self) -> int:
        return self.components.shape[1] if self.components is not None else self.scale.shape[0]

    @property
    def n_out(self) -> int:
        return self.scale.shape[0]

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.n_in:
            raise ShapeException(f"Преобразование ожидает {self.n_in} атрибутов, получено {features.shape}")
        projected = features if self.components is None else (features - self.mean) @ self.components.T
        low, high = TARGET_RANGES[self.target_range]
        return np.clip(projected * self.scale + self.offset, low, high)

    def to_dict(self) -> Dict[str, Any]:
        def as_list(values: Optional[np.ndarray]):
            return values.tolist() if values is not None else None

        return {
            "target_range": self.target_range,
            "fit_mode": self.fit_mode,
            "scale": self.scale.tolist(),
            "offset": self.offset.tolist(),
            "components": as_list(self.components),
            "mean": as_list(self.mean),
            "explained_variance_ratio": as_list(self.explained_variance_ratio),
        }

    @classmethod
    def from_dict(cls, body: Dict[str, Any]) -> "FeatureTransform":
        def as_array(values) -> Optional[np.ndarray]:
            return np.asarray(values, dtype=np.float64) if values is not None else None

        _check_range(body["target_range"])
        return cls(
            target_range=body["target_range"],
            scale=as_array(body["scale"]),
            offset=as_array(body["offset"]),
            components=as_array(body.get("components")),
            mean=as_array(body.get("mean")),
            explained_variance_ratio=as_array(body.get("explained_variance_ratio")),
            fit_mode=body.get("fit_mode", FIT_ALL),
        )


def _fit_scaler(projected: np.ndarray, target_range: str) -> MinMaxScaler:
    scaler = MinMaxScaler(feature_range=TARGET_RANGES[target_range], clip=True)
    return scaler.fit(projected)


def pca_reduce(
    features: np.ndarray,
    dim: int,
    target_range: str = "unit",
    fit_rows: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, FeatureTransform]:
    """
    Центрирование, проекция на dim главных компонент, min-max в целевой диапазон.

    Args:
        features: Исходные атрибуты (n, d)
        dim: Размерность после сжатия
        target_range: unit ([0, 1]) или two_pi ([0, 2pi])
        fit_rows: Узлы для обучения PCA и масштаба (индуктивный режим); None - все узлы

    Returns:
        Tuple[np.ndarray, FeatureTransform]: Сжатые признаки всех узлов и преобразование
    """
    features = np.asarray(features, dtype=np.float64)
    _check_range(target_range)
    fit_data = features if fit_rows is None else features[fit_rows]
    if not 1 <= dim <= min(fit_data.shape):
        raise DomainException(f"dim={dim} больше допустимого {min(fit_data.shape)}")

    pca = PCA(n_components=dim, svd_solver="full").fit(fit_data)
    components = np.array(pca.components_, dtype=np.float64)
    mean = np.array(pca.mean_, dtype=np.float64)
    scaler = _fit_scaler((fit_data - mean) @ components.T, target_range)

    transform = FeatureTransform(
        target_range=target_range,
        scale=np.array(scaler.scale_, dtype=np.float64),
        offset=np.array(scaler.min_, dtype=np.float64),
        components=components,
        mean=mean,
        explained_variance_ratio=np.array(pca.explained_variance_ratio_, dtype=np.float64),
        fit_mode=FIT_ALL if fit_rows is None else FIT_ROWS,
    )
    logger.info(
        f"📉 PCA {features.shape[1]} -> {dim}, объясненная дисперсия {pca.explained_variance_ratio_.sum():.3f}"
    )
    return transform.transform(features), transform


def fit_feature_transform(
    features: np.ndarray,
    dim: int,
    target_range: str = "unit",
    fit_rows: Optional[np.ndarray] = None
) -> FeatureTransform:
    """
    Преобразование в диапазон кодирования: PCA до dim, если атрибутов больше, иначе только min-max.

    Args:
        features: Исходные атрибуты (n, d)
        dim: Размерность PCA
        target_range: unit или two_pi
        fit_rows: Узлы для оценки преобразования; None - все

    Returns:
        FeatureTransform: Обученное преобразование
    """
    features = np.asarray(features, dtype=np.float64)
    if features.shape[1] > dim:
        _, transform = pca_reduce(features, dim, target_range, fit_rows)
        return transform
    _check_range(target_range)
    scaler = _fit_scaler(features if fit_rows is None else features[fit_rows], target_range)
    return FeatureTransform(
        target_range=target_range,
        scale=np.array(scaler.scale_, dtype=np.float64),
        offset=np.array(scaler.min_, dtype=np.float64),
        fit_mode=FIT_ALL if fit_rows is None else FIT_ROWS,
    )


def prepare_features(
    features: np.ndarray,
    dim: int,
    target_range: str = "unit",
    fit_rows: Optional[np.ndarray] = None
) -> np.ndarray:
    """Признаки (n, min(d, dim)) в диапазоне кодирования."""
    return fit_feature_transform(features, dim, target_range, fit_rows).transform(features)
