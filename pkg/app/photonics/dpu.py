"""
Дифракционный модуль (DPU): параметры и прямой проход.

Входные волноводы -> [распространение -> металиния] x num_layers -> распространение -> выходные волноводы.
"""

from dataclasses import dataclass, replace
from typing import Optional

import torch

from app.core.exceptions import DomainException, ShapeException
from app.photonics.field import as_complex_tensor, propagate
from app.photonics.lut import WIDTH_MAX, WIDTH_MIN, MetaAtomLut
from app.photonics.metaline import apply_metaline
from app.photonics.ports import couple_ports, inject_ports
from app.schemas.geometry import DpuGeometry


@dataclass(frozen=True, eq=False)
class CoefficientNoise:
    """Добавки к фазе и амплитуде по группам мета-атомов, (num_layers, n_groups)."""

    phase: torch.Tensor
    amplitude: torch.Tensor


@dataclass(frozen=True, eq=False)
class DpuParams:
    """Ширины щелей всех металиний DPU."""

    geometry: DpuGeometry
    widths: torch.Tensor
    binary: bool = False
    noise: Optional[CoefficientNoise] = None

    def __post_init__(self):
        expected = (self.geometry.num_layers, self.geometry.n_groups)
        if tuple(self.widths.shape) != expected:
            raise ShapeException(f"Матрица ширин {tuple(self.widths.shape)}, ожидается {expected}")
        values = self.widths.detach()
        if self.binary:
            if not torch.all((values == WIDTH_MIN) | (values == WIDTH_MAX)):
                raise DomainException("Бинарный DPU допускает только ширины 0 и 100 нм")
        elif torch.any(values < WIDTH_MIN) or torch.any(values > WIDTH_MAX):
            raise DomainException("Ширины щелей должны лежать в [0, 100] нм")
        if self.noise is not None:
            if tuple(self.noise.phase.shape) != expected or tuple(self.noise.amplitude.shape) != expected:
                raise ShapeException("Форма шума не совпадает с формой ширин")

    def with_widths(self, widths: torch.Tensor, binary: Optional[bool] = None) -> "DpuParams":
        return replace(self, widths=widths, binary=self.binary if binary is None else binary)


def init_widths(geometry: DpuGeometry, generator: Optional[torch.Generator] = None) -> torch.Tensor:
    """Случайные ширины, равномерно в [0, 100] нм."""
    shape = (geometry.num_layers, geometry.n_groups)
    return torch.rand(shape, generator=generator, dtype=torch.float64) * (WIDTH_MAX - WIDTH_MIN) + WIDTH_MIN


def dpu_forward(inputs, params: DpuParams, lut: MetaAtomLut) -> torch.Tensor:
    """
    Прямой проход DPU.

    Args:
        inputs: Комплексные амплитуды входных волноводов (..., n_in)
        params: Параметры DPU
        lut: Таблица мета-атома

    Returns:
        torch.Tensor: Амплитуды выходных волноводов (..., n_out)
    """
    geometry = params.geometry
    inputs = as_complex_tensor(inputs)
    if inputs.shape[-1] != geometry.n_in:
        raise ShapeException(f"DPU ожидает {geometry.n_in} входов, получено {inputs.shape[-1]}")

    field = inject_ports(inputs, geometry)
    for layer in range(geometry.num_layers):
        field = propagate(
            field, geometry.layer_distance, geometry.wavelength, geometry.effective_index, geometry.pad_factor
        )
        noise = params.noise
        field = apply_metaline(
            field,
            params.widths[layer],
            lut,
            geometry,
            phase_noise=noise.phase[layer] if noise is not None else None,
            amplitude_noise=noise.amplitude[layer] if noise is not None else None,
        )
    field = propagate(field, geometry.layer_distance, geometry.wavelength, geometry.effective_index, geometry.pad_factor)
    return couple_ports(field, geometry)


def transfer_matrix(params: DpuParams, lut: MetaAtomLut) -> torch.Tensor:
    """
    Матрица (n_in, n_out) линейного отображения DPU: dpu_forward(x) == x @ M.

    Строка j - отклик на единичную амплитуду в j-м входном волноводе.
    """
    basis = torch.eye(params.geometry.n_in, dtype=torch.complex128)
    return dpu_forward(basis, params, lut)
