"""
Одномерное комплексное поле и распространение методом углового спектра.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import torch

from app.core.exceptions import DomainException

COMPLEX = torch.complex128


def as_complex_tensor(values) -> torch.Tensor:
    """Привести массив или тензор к complex128 без потери графа autograd."""
    if isinstance(values, torch.Tensor):
        return values if values.dtype == COMPLEX else values.to(COMPLEX)
    return torch.as_tensor(np.asarray(values), dtype=COMPLEX)


@dataclass(frozen=True, eq=False)
class ComplexField1D:
    """
    Дискретное комплексное поле вдоль поперечной оси слэба.

    Последняя ось samples - поперечная координата, ведущие оси - батч.
    """

    samples: torch.Tensor
    pitch: float
    origin: float = 0.0

    def __post_init__(self):
        if self.pitch <= 0:
            raise DomainException("Шаг дискретизации поля должен быть больше нуля")
        if self.samples.ndim < 1 or self.samples.shape[-1] < 1:
            raise DomainException("Поле должно содержать хотя бы один отсчет")

    @property
    def n_samples(self) -> int:
        return self.samples.shape[-1]

    def coordinates(self) -> np.ndarray:
        """Поперечные координаты отсчетов, м."""
        return self.origin + self.pitch * np.arange(self.n_samples)

    def power(self) -> torch.Tensor:
        """Полная мощность sum |u|^2 * pitch (по последней оси)."""
        return (self.samples.real ** 2 + self.samples.imag ** 2).sum(dim=-1) * self.pitch

    def with_samples(self, samples: torch.Tensor) -> "ComplexField1D":
        return ComplexField1D(samples=samples, pitch=self.pitch, origin=self.origin)


@lru_cache(maxsize=256)
def _transfer_function(n_total: int, pitch: float, distance: float, wavelength: float, effective_index: float) -> np.ndarray:
    """H(f) для слоя толщиной distance, включая затухание эванесцентных компонент."""
    frequencies = np.fft.fftfreq(n_total, d=pitch)
    cutoff = effective_index / wavelength
    argument = cutoff ** 2 - frequencies ** 2
    propagating = argument >= 0
    root = np.sqrt(np.abs(argument))
    transfer = np.where(
        propagating,
        np.exp(1j * 2.0 * np.pi * distance * root),
        np.exp(-2.0 * np.pi * distance * root),
    )
    return transfer


def propagate(
    field: ComplexField1D,
    distance: float,
    wavelength: float,
    effective_index: float,
    pad_factor: int = 1
) -> ComplexField1D:
    """
    Распространение поля на расстояние distance методом углового спектра.

    Args:
        field: Входное поле
        distance: Расстояние, м
        wavelength: Длина волны в вакууме, м
        effective_index: Эффективный показатель преломления слэба
        pad_factor: Во сколько раз окно БПФ длиннее апертуры

    Returns:
        ComplexField1D: Поле на той же сетке (дополнение нулями срезано)
    """
    if distance < 0:
        raise DomainException(f"Расстояние распространения отрицательно: {distance}")
    if pad_factor < 1:
        raise DomainException("pad_factor должен быть не меньше 1")
    if distance == 0:
        return field

    samples = as_complex_tensor(field.samples)
    n = samples.shape[-1]
    n_total = n * int(pad_factor)
    left = (n_total - n) // 2
    right = n_total - n - left

    if n_total > n:
        batch = samples.shape[:-1]
        samples = torch.cat(
            [samples.new_zeros(*batch, left), samples, samples.new_zeros(*batch, right)], dim=-1
        )

    transfer = torch.from_numpy(
        _transfer_function(n_total, float(field.pitch), float(distance), float(wavelength), float(effective_index))
    )
    spectrum = torch.fft.fft(samples, dim=-1) * transfer
    output = torch.fft.ifft(spectrum, dim=-1)[..., left:left + n]
    return field.with_samples(output)
