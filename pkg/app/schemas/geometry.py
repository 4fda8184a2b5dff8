"""
Схемы геометрии DPU.

Содержит Pydantic модель геометрии модуля и пресеты из раздела настроек DPU.
"""

from enum import Enum
from typing import Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import settings


class DpuRole(str, Enum):
    """Назначение DPU внутри модели."""

    HEAD = "head"  # Преобразование признаков узла (MSG)
    CLASSIFIER = "classifier"  # Оптический классификатор DGNN-O
    READOUT = "readout"  # Read-out для графовых задач


class GeometryPreset(str, Enum):
    """Пресеты геометрии."""

    SYNTHETIC = "synthetic"
    BENCHMARK = "benchmark"
    ACTION = "action"


class DpuGeometry(BaseModel):
    """Геометрия дифракционного модуля (DPU)."""

    model_config = ConfigDict(frozen=True)

    num_layers: int = Field(..., description="Количество металиний")
    atoms_per_line: int = Field(..., description="Мета-атомов в одной металинии")
    atom_pitch: float = Field(default_factory=lambda: settings.ATOM_PITCH, description="Период мета-атомов, м")
    layer_distance: float = Field(..., description="Расстояние между металиниями, м")
    wavelength: float = Field(default_factory=lambda: settings.WAVELENGTH, description="Длина волны в вакууме, м")
    effective_index: float = Field(default_factory=lambda: settings.EFFECTIVE_INDEX, description="Эффективный индекс слэба")
    n_in: int = Field(..., description="Количество входных волноводов")
    n_out: int = Field(..., description="Количество выходных волноводов")
    group_size: int = Field(default_factory=lambda: settings.GROUP_SIZE, description="Соседних атомов с общей шириной")
    oversample: int = Field(default_factory=lambda: settings.OVERSAMPLE, description="Отсчетов поля на период атома")
    pad_factor: int = Field(default_factory=lambda: settings.PAD_FACTOR, description="Кратность дополнения нулями для БПФ")
    mode_halfwidth: float = Field(default_factory=lambda: settings.MODE_HALFWIDTH, description="Полуширина моды волновода, м")

    @field_validator("num_layers", "atoms_per_line", "n_in", "n_out", "group_size", "oversample", "pad_factor")
    @classmethod
    def validate_positive_int(cls, v: int) -> int:
        """Валидация целочисленных параметров."""
        if v < 1:
            raise ValueError("Параметр геометрии должен быть не меньше 1")
        return v

    @field_validator("atom_pitch", "layer_distance", "wavelength", "effective_index", "mode_halfwidth")
    @classmethod
    def validate_positive_float(cls, v: float) -> float:
        """Валидация физических размеров."""
        if v <= 0:
            raise ValueError("Физический параметр должен быть больше нуля")
        return v

    @model_validator(mode="after")
    def validate_layout(self) -> "DpuGeometry":
        """Проверка согласованности групп и портов."""
        if self.atoms_per_line % self.group_size != 0:
            raise ValueError("atoms_per_line должно делиться на group_size")
        if self.n_in > self.atoms_per_line or self.n_out > self.atoms_per_line:
            raise ValueError("Портов не может быть больше, чем мета-атомов")
        return self

    @property
    def n_groups(self) -> int:
        """Количество независимых ширин в металинии."""
        return self.atoms_per_line // self.group_size

    @property
    def aperture(self) -> float:
        """Длина апертуры, м."""
        return self.atoms_per_line * self.atom_pitch

    @property
    def pitch(self) -> float:
        """Шаг дискретизации поля, м."""
        return self.atom_pitch / self.oversample

    @property
    def n_samples(self) -> int:
        """Количество отсчетов поля на апертуре."""
        return self.atoms_per_line * self.oversample


_PRESETS = {
    GeometryPreset.SYNTHETIC: dict(num_layers=3, atoms_per_line=90, layer_distance=20e-6, n_in=3, n_out=2),
    GeometryPreset.BENCHMARK: dict(num_layers=4, atoms_per_line=600, layer_distance=100e-6, n_in=20, n_out=2),
    GeometryPreset.ACTION: dict(num_layers=6, atoms_per_line=600, layer_distance=100e-6, n_in=3, n_out=2),
}

# Слоев у вспомогательных DPU, остальное берется из пресета
CLASSIFIER_LAYERS = 6
READOUT_LAYERS = 5


def preset_geometry(
    preset: GeometryPreset,
    role: DpuRole = DpuRole.HEAD,
    n_in: Optional[int] = None,
    n_out: Optional[int] = None,
    **overrides
) -> DpuGeometry:
    """
    Построение геометрии DPU по пресету.

    Args:
        preset: Пресет (synthetic, benchmark, action)
        role: Назначение модуля; classifier и readout меняют число слоев
        n_in: Переопределение числа входов
        n_out: Переопределение числа выходов
        **overrides: Любые другие поля DpuGeometry

    Returns:
        DpuGeometry: Геометрия модуля
    """
    params = dict(_PRESETS[GeometryPreset(preset)])
    if role == DpuRole.CLASSIFIER:
        params["num_layers"] = CLASSIFIER_LAYERS
    elif role == DpuRole.READOUT:
        params.update(num_layers=READOUT_LAYERS, n_in=2, n_out=2)
    if n_in is not None:
        params["n_in"] = n_in
    if n_out is not None:
        params["n_out"] = n_out
    params.update(overrides)
    return DpuGeometry(**params)
