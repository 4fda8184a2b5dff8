"""
Схемы для параметров обучения.

Содержит Pydantic модели конфигурации обучения DGNN и электронных моделей.
"""

from enum import Enum
from typing import List, Optional, Union
from pydantic import BaseModel, Field, field_validator

from config.settings import settings


class LossKind(str, Enum):
    """Функции потерь."""

    SOFTMAX_CE = "softmax_ce"  # DGNN-E, электронные модели
    MSE_ONEHOT = "mse_onehot"  # DGNN-O


class TrainConfig(BaseModel):
    """Конфигурация обучения DGNN."""

    learning_rate: float = Field(default_factory=lambda: settings.LR_DGNN_E, description="Шаг Adam")
    epochs: int = Field(default_factory=lambda: settings.EPOCHS, description="Количество эпох")
    batch: Union[str, int] = Field("full", description="'full' или размер мини-батча")
    loss: LossKind = Field(LossKind.SOFTMAX_CE, description="Функция потерь")
    binary_training: bool = Field(False, description="Бинарная модуляция со straight-through")
    l2_weight: float = Field(0.0, description="L2 только для весов классификатора")
    optics_trainable: bool = Field(True, description="False - ширины щелей заморожены (абляция)")
    seed: int = Field(0, description="Зерно генератора")
    log_every: int = Field(100, description="Период логирования эпох")

    @field_validator("learning_rate")
    @classmethod
    def validate_learning_rate(cls, v: float) -> float:
        """Валидация шага обучения."""
        if v <= 0:
            raise ValueError("learning_rate должен быть больше нуля")
        return v

    @field_validator("epochs")
    @classmethod
    def validate_epochs(cls, v: int) -> int:
        """Нулевые эпохи допускаются только для переобучения классификатора."""
        if v < 0:
            raise ValueError("epochs не может быть отрицательным")
        return v

    @field_validator("batch")
    @classmethod
    def validate_batch(cls, v: Union[str, int]) -> Union[str, int]:
        """Валидация размера батча."""
        if isinstance(v, str):
            if v == "full":
                return v
            v = int(v)
        if v < 1:
            raise ValueError("Размер батча должен быть положительным")
        return v

    @field_validator("l2_weight")
    @classmethod
    def validate_l2(cls, v: float) -> float:
        if v < 0:
            raise ValueError("l2_weight не может быть отрицательным")
        return v

    @property
    def batch_size(self) -> Optional[int]:
        """Размер мини-батча или None для полного батча."""
        return None if self.batch == "full" else int(self.batch)


class BaselineConfig(BaseModel):
    """Конфигурация обучения электронных моделей."""

    learning_rate: float = Field(default_factory=lambda: settings.BASELINE_LR)
    epochs: int = Field(default_factory=lambda: settings.BASELINE_EPOCHS)
    hidden: int = Field(default_factory=lambda: settings.BASELINE_HIDDEN, description="Размер скрытого слоя MLP")
    weight_decays: List[float] = Field(default_factory=lambda: settings.weight_decays_list)
    seed: int = Field(0)

    @field_validator("learning_rate")
    @classmethod
    def validate_learning_rate(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("learning_rate должен быть больше нуля")
        return v

    @field_validator("weight_decays")
    @classmethod
    def validate_weight_decays(cls, v: List[float]) -> List[float]:
        """Сетка не пустая и неотрицательная."""
        if not v or any(w < 0 for w in v):
            raise ValueError("weight_decays: непустой список неотрицательных значений")
        return v
