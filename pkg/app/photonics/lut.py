"""
Таблица соответствия ширина щели -> коэффициент модуляции мета-атома.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
import torch
from loguru import logger

from app.core.exceptions import DomainException, FormatException

WIDTH_MIN = 0.0
WIDTH_MAX = 100.0
DEFAULT_PHASE_RANGE = 1.55  # рад при ширине 100 нм
LUT_HEADER = "# metaatom-lut v1"


@dataclass(frozen=True, eq=False)
class MetaAtomLut:
    """LUT мета-атома: фаза и амплитуда как функции ширины щели (нм)."""

    width_grid: np.ndarray
    phase_of_width: np.ndarray
    amplitude_of_width: np.ndarray
    source: str = field(default="default-linear", compare=False)

    def __post_init__(self):
        grid = np.asarray(self.width_grid, dtype=np.float64)
        if grid.ndim != 1 or grid.size < 2:
            raise DomainException("LUT должна содержать минимум две точки")
        if np.any(np.diff(grid) <= 0):
            raise DomainException("Сетка ширин LUT должна строго возрастать")
        if grid[0] != WIDTH_MIN or grid[-1] != WIDTH_MAX:
            raise DomainException(f"Сетка ширин LUT должна покрывать [{WIDTH_MIN}, {WIDTH_MAX}] нм")
        amplitude = np.asarray(self.amplitude_of_width, dtype=np.float64)
        phase = np.asarray(self.phase_of_width, dtype=np.float64)
        if amplitude.shape != grid.shape or phase.shape != grid.shape:
            raise DomainException("Столбцы LUT разной длины")
        if np.any(amplitude < 0) or np.any(amplitude > 1):
            raise DomainException("Амплитуда LUT должна лежать в [0, 1]")
        object.__setattr__(self, "width_grid", grid)
        object.__setattr__(self, "phase_of_width", phase)
        object.__setattr__(self, "amplitude_of_width", amplitude)

    @property
    def amplitude_max(self) -> float:
        """Максимальная амплитуда, верхняя граница при зашумлении."""
        return float(self.amplitude_of_width.max())

    def tensors(self):
        """Сетка, фаза и амплитуда как тензоры float64."""
        return (
            torch.from_numpy(self.width_grid),
            torch.from_numpy(self.phase_of_width),
            torch.from_numpy(self.amplitude_of_width),
        )


def default_lut(points: int = 101) -> MetaAtomLut:
    """Линейная фаза 0..1.55 рад, амплитуда 1."""
    grid = np.linspace(WIDTH_MIN, WIDTH_MAX, points)
    return MetaAtomLut(
        width_grid=grid,
        phase_of_width=np.linspace(0.0, DEFAULT_PHASE_RANGE, points),
        amplitude_of_width=np.ones(points),
    )


def load_lut(path: Union[str, Path]) -> MetaAtomLut:
    """
    Загрузка LUT из текстового файла.

    Формат: заголовок `# metaatom-lut v1`, далее строки `width_nm phase_rad [amplitude]`.

    Args:
        path: Путь к файлу

    Returns:
        MetaAtomLut: Загруженная таблица
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != LUT_HEADER:
        raise FormatException(f"ожидается заголовок '{LUT_HEADER}'", str(path), 1)

    rows = []
    for number, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        if len(parts) not in (2, 3):
            raise FormatException("ожидается 2 или 3 столбца", str(path), number)
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise FormatException("нечисловое значение", str(path), number)
        if len(values) == 2:
            values.append(1.0)
        rows.append(values)

    if not rows:
        raise FormatException("LUT пуста", str(path))
    table = np.asarray(rows, dtype=np.float64)
    lut = MetaAtomLut(table[:, 0], table[:, 1], table[:, 2], source=str(path))
    logger.info(f"📐 LUT загружена: {path} ({len(rows)} точек)")
    return lut


def _interp(x: torch.Tensor, xp: torch.Tensor, fp: torch.Tensor) -> torch.Tensor:
    """Кусочно-линейная интерполяция, дифференцируемая по x."""
    idx = torch.searchsorted(xp, x.detach().contiguous(), right=True) - 1
    idx = idx.clamp(0, xp.numel() - 2)
    x0, x1 = xp[idx], xp[idx + 1]
    f0, f1 = fp[idx], fp[idx + 1]
    return f0 + (x - x0) / (x1 - x0) * (f1 - f0)


def width_to_coefficient(
    width,
    lut: MetaAtomLut,
    phase_noise: Optional[torch.Tensor] = None,
    amplitude_noise: Optional[torch.Tensor] = None
) -> torch.Tensor:
    """
    Комплексный коэффициент пропускания мета-атома.

    Args:
        width: Ширина щели в нм (скаляр или тензор)
        lut: Таблица мета-атома
        phase_noise: Добавка к фазе (та же форма, что width)
        amplitude_noise: Добавка к амплитуде, результат обрезается в [0, amplitude_max]

    Returns:
        torch.Tensor: amplitude(w) * exp(i * phase(w)), complex128
    """
    width = torch.as_tensor(width, dtype=torch.float64)
    if torch.any(width < WIDTH_MIN) or torch.any(width > WIDTH_MAX) or torch.any(torch.isnan(width)):
        raise DomainException(f"Ширина щели вне [{WIDTH_MIN}, {WIDTH_MAX}] нм")

    grid, phase_table, amplitude_table = lut.tensors()
    phase = _interp(width, grid, phase_table)
    amplitude = _interp(width, grid, amplitude_table)

    if phase_noise is not None:
        phase = phase + phase_noise
    if amplitude_noise is not None:
        amplitude = torch.clamp(amplitude + amplitude_noise, 0.0, lut.amplitude_max)

    return amplitude * torch.exp(1j * phase)
