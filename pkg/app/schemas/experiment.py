"""
Схемы конфигурации эксперимента.

Содержит Pydantic модели задачи, данных, модели DGNN, шума и свипов.
"""

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union
from pydantic import BaseModel, Field, field_validator, model_validator

from app.schemas.geometry import GeometryPreset
from app.schemas.training import BaselineConfig, TrainConfig
from config.settings import settings


class TaskKind(str, Enum):
    """Тип задачи."""

    NODE_TRANSDUCTIVE = "node_transductive"
    NODE_INDUCTIVE = "node_inductive"
    GRAPH_ACTION = "graph_action"


class Encoding(str, Enum):
    """Кодирование атрибутов в оптическое поле."""

    AMPLITUDE = "amplitude"  # x -> x + 0i, x в [0, 1]
    PHASE = "phase"  # x -> exp(ix), x в [0, 2pi]


class ClassifierKind(str, Enum):
    """Классификатор DGNN."""

    ELECTRONIC = "electronic"  # DGNN-E
    OPTICAL = "optical"  # DGNN-O


class BaselineKind(str, Enum):
    """Электронные модели сравнения."""

    PCA = "pca"
    MLP = "mlp"
    PPRGO_S = "pprgo_s"
    PPRGO_WS = "pprgo_ws"


class SweepAxis(str, Enum):
    """Оси свипа."""

    K = "k"
    P = "P"
    SIGMA = "sigma"
    LABELS_PER_CLASS = "labels_per_class"


class SbmSpec(BaseModel):
    """Параметры синтетического графа SBM."""

    n: int = Field(300, description="Количество узлов")
    n_classes: int = Field(3, description="Количество классов")
    p: float = Field(0.1, description="Вероятность ребра внутри класса")
    q: float = Field(0.005, description="Вероятность ребра между классами")
    attr_std: float = Field(0.15, description="СКО гауссовых атрибутов")

    @model_validator(mode="after")
    def validate_probabilities(self) -> "SbmSpec":
        """Проверка 0 <= q <= p <= 1 и равных сообществ."""
        if not (0.0 <= self.q <= self.p <= 1.0):
            raise ValueError("Требуется 0 <= q <= p <= 1")
        if self.n_classes < 1 or self.n % self.n_classes != 0:
            raise ValueError("n должно делиться на n_classes")
        return self


class SkeletonSpec(BaseModel):
    """Синтетические скелетные последовательности (если датасет не задан)."""

    per_class: int = Field(5, description="Видео на класс")
    frames: int = Field(12, description="Кадров в последовательности")
    n_classes: int = Field(6, description="Количество действий")


class ModelSpec(BaseModel):
    """Параметры модели DGNN."""

    heads: int = Field(4, description="Количество голов P")
    message_dim: int = Field(2, description="Размерность сообщения m (выходов DPU)")
    top_k: int = Field(default_factory=lambda: settings.TOP_K, description="Соседей по PageRank")
    alpha: float = Field(default_factory=lambda: settings.PPR_ALPHA, description="Вероятность телепортации")
    preset: GeometryPreset = Field(GeometryPreset.BENCHMARK, description="Пресет геометрии")
    encoding: Encoding = Field(Encoding.AMPLITUDE, description="Кодирование атрибутов")
    classifier: ClassifierKind = Field(ClassifierKind.ELECTRONIC, description="Тип классификатора")
    geometry_overrides: Dict[str, Any] = Field(default_factory=dict, description="Переопределения геометрии")
    lut_file: Optional[str] = Field(default_factory=lambda: settings.LUT_FILE or None)
    frames: int = Field(default_factory=lambda: settings.ACTION_WINDOW, description="Кадров в подпоследовательности")
    window_stride: int = Field(1, description="Шаг окна подпоследовательностей")

    @field_validator("heads", "message_dim", "top_k", "frames", "window_stride")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Значение должно быть не меньше 1")
        return v

    @field_validator("alpha")
    @classmethod
    def validate_alpha(cls, v: float) -> float:
        """alpha в (0, 1]."""
        if not 0 < v <= 1:
            raise ValueError("alpha должно лежать в (0, 1]")
        return v


class NoiseSpec(BaseModel):
    """Бинаризация и шум коэффициентов после обучения."""

    binary: bool = Field(False, description="Бинарная модуляция (straight-through при обучении)")
    sigma: float = Field(0.0, description="СКО шума фазы и амплитуды")
    retrain: bool = Field(False, description="Переобучить классификатор при замороженной оптике")
    retrain_epochs: int = Field(500, description="Эпох переобучения")
    retrain_lr: float = Field(default_factory=lambda: settings.LR_RETRAIN)
    seed: int = Field(0, description="Зерно шума")

    @field_validator("sigma")
    @classmethod
    def validate_sigma(cls, v: float) -> float:
        if v < 0:
            raise ValueError("sigma не может быть отрицательной")
        return v


class SplitSpec(BaseModel):
    """Разбиение узлов или скелетных видео."""

    test_size: Optional[int] = Field(None, description="Случайных тестовых узлов (None - из bundle)")
    labels_per_class: Optional[int] = Field(None, description="Меток на класс в train")
    folds: int = Field(5, description="Фолдов для action recognition")
    pca_dim: int = Field(default_factory=lambda: settings.PCA_DIM)


class ExperimentConfig(BaseModel):
    """Полная конфигурация эксперимента."""

    task: TaskKind = Field(TaskKind.NODE_TRANSDUCTIVE)
    dataset: Optional[str] = Field(None, description="Путь к bundle графа или к скелетному датасету")
    sbm: Optional[SbmSpec] = Field(None, description="Синтетический граф вместо dataset")
    skeletons: Optional[SkeletonSpec] = Field(None, description="Синтетические скелеты вместо dataset")
    model: ModelSpec = Field(default_factory=ModelSpec)
    train: TrainConfig = Field(default_factory=TrainConfig)
    baselines: List[BaselineKind] = Field(default_factory=list)
    baseline: BaselineConfig = Field(default_factory=BaselineConfig)
    noise: NoiseSpec = Field(default_factory=NoiseSpec)
    split: SplitSpec = Field(default_factory=SplitSpec)
    output_dir: str = Field(default_factory=lambda: settings.REPORTS_DIR)
    seed: int = Field(0, description="Зерно данных, разбиения и инициализации")
    name: Optional[str] = Field(None, description="Имя запуска")

    @model_validator(mode="after")
    def validate_source(self) -> "ExperimentConfig":
        """Источник данных должен соответствовать задаче."""
        if self.task == TaskKind.GRAPH_ACTION:
            if self.sbm is not None:
                raise ValueError("SBM не применим к action recognition")
            if self.dataset is None and self.skeletons is None:
                self.skeletons = SkeletonSpec()
        else:
            if (self.dataset is None) == (self.sbm is None):
                raise ValueError("Нужно задать ровно один источник: dataset или sbm")
        return self

    @model_validator(mode="after")
    def default_sbm_preset(self) -> "ExperimentConfig":
        """Для SBM без явного пресета - синтетическая геометрия."""
        if self.sbm is not None and "preset" not in self.model.model_fields_set:
            self.model = self.model.model_copy(update={"preset": GeometryPreset.SYNTHETIC})
        return self

    @property
    def run_name(self) -> str:
        if self.name:
            return self.name
        source = Path(self.dataset).name if self.dataset else ("sbm" if self.sbm else "skeletons")
        return f"{self.task.value}-{source}-{self.model.classifier.value}-seed{self.seed}"

    @classmethod
    def from_file(cls, path: Union[str, Path], **overrides) -> "ExperimentConfig":
        """
        Загрузка из JSON; значения файла перекрывают переданные overrides (флаги CLI).

        Args:
            path: Путь к JSON
            **overrides: Значения из флагов командной строки

        Returns:
            ExperimentConfig: Конфигурация
        """
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        merged = _deep_merge(overrides, data)
        return cls.model_validate(merged)


def _deep_merge(base: Dict[str, Any], top: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in top.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged
