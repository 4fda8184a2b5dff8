"""
Связь волноводных портов с полем на входной и выходной плоскостях.

Плоскость делится на равные интервалы по числу волноводов, волновод стоит в центре интервала.
"""

from functools import lru_cache
from typing import Optional

import numpy as np
import torch

from app.core.exceptions import ShapeException
from app.photonics.field import ComplexField1D, as_complex_tensor
from app.schemas.geometry import DpuGeometry


def port_centers(geometry: DpuGeometry, count: int) -> np.ndarray:
    """Центры интервалов портов от левого края апертуры, м."""
    return (np.arange(count) + 0.5) * geometry.aperture / count


@lru_cache(maxsize=128)
def _modes(geometry: DpuGeometry, count: int, mode_halfwidth: float) -> np.ndarray:
    x = (np.arange(geometry.n_samples) + 0.5) * geometry.pitch
    centers = port_centers(geometry, count)
    modes = np.exp(-(((x[None, :] - centers[:, None]) / mode_halfwidth) ** 2))
    # единичная мощность в дискретном смысле: sum |g|^2 * pitch = 1
    modes /= np.sqrt((modes ** 2).sum(axis=1, keepdims=True) * geometry.pitch)
    return modes


def port_modes(geometry: DpuGeometry, count: int, mode_halfwidth: Optional[float] = None) -> torch.Tensor:
    """
    Гауссовы моды волноводов единичной мощности.

    Args:
        geometry: Геометрия DPU
        count: Количество портов на плоскости
        mode_halfwidth: Полуширина моды по уровню 1/e (по умолчанию из геометрии)

    Returns:
        torch.Tensor: (count, n_samples) complex128
    """
    halfwidth = float(mode_halfwidth or geometry.mode_halfwidth)
    return torch.from_numpy(_modes(geometry, int(count), halfwidth)).to(torch.complex128)


def inject_ports(values, geometry: DpuGeometry, mode_halfwidth: Optional[float] = None) -> ComplexField1D:
    """Входные амплитуды волноводов (..., n_in) -> поле на входной плоскости."""
    values = as_complex_tensor(values)
    if values.shape[-1] != geometry.n_in:
        raise ShapeException(f"Ожидается {geometry.n_in} входных амплитуд, получено {values.shape[-1]}")
    samples = values @ port_modes(geometry, geometry.n_in, mode_halfwidth)
    return ComplexField1D(samples=samples, pitch=geometry.pitch, origin=0.5 * geometry.pitch)


def couple_ports(field: ComplexField1D, geometry: DpuGeometry, mode_halfwidth: Optional[float] = None) -> torch.Tensor:
    """Поле на выходной плоскости -> амплитуды (..., n_out) через перекрытие с модами."""
    if field.n_samples != geometry.n_samples:
        raise ShapeException(f"Поле из {field.n_samples} отсчетов, апертура требует {geometry.n_samples}")
    modes = port_modes(geometry, geometry.n_out, mode_halfwidth)
    return (as_complex_tensor(field.samples) @ modes.conj().T) * geometry.pitch
