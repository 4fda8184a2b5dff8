"""
Модуляция поля металинией.
"""

from typing import Optional

import torch

from app.core.exceptions import ShapeException
from app.photonics.field import ComplexField1D
from app.photonics.lut import MetaAtomLut, width_to_coefficient
from app.schemas.geometry import DpuGeometry


def expand_coefficients(group_coefficients: torch.Tensor, geometry: DpuGeometry) -> torch.Tensor:
    """Коэффициенты групп -> коэффициенты отсчетов поля (group_size * oversample повторов)."""
    return torch.repeat_interleave(group_coefficients, geometry.group_size * geometry.oversample, dim=-1)


def apply_metaline(
    field: ComplexField1D,
    layer_widths: torch.Tensor,
    lut: MetaAtomLut,
    geometry: DpuGeometry,
    phase_noise: Optional[torch.Tensor] = None,
    amplitude_noise: Optional[torch.Tensor] = None
) -> ComplexField1D:
    """
    Умножение поля на коэффициенты мета-атомов одной металинии.

    Args:
        field: Поле на апертуре металинии
        layer_widths: Ширины групп (n_groups,)
        lut: Таблица мета-атома
        geometry: Геометрия DPU
        phase_noise: Шум фазы по группам
        amplitude_noise: Шум амплитуды по группам

    Returns:
        ComplexField1D: Промодулированное поле
    """
    layer_widths = torch.as_tensor(layer_widths, dtype=torch.float64)
    if layer_widths.shape != (geometry.n_groups,):
        raise ShapeException(
            f"Длина строки ширин {tuple(layer_widths.shape)} не равна числу групп {geometry.n_groups}"
        )
    if field.n_samples != geometry.n_samples:
        raise ShapeException(f"Поле из {field.n_samples} отсчетов, апертура требует {geometry.n_samples}")

    coefficients = width_to_coefficient(layer_widths, lut, phase_noise, amplitude_noise)
    return field.with_samples(field.samples * expand_coefficients(coefficients, geometry))
