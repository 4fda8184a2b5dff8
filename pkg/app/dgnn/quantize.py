"""
Бинарная модуляция и шум коэффициентов модуляции.
"""

import copy

import torch
from loguru import logger

from app.core.exceptions import DomainException
from app.dgnn.model import DgnnModel, quantize_widths
from app.photonics import CoefficientNoise, DpuParams


def quantize_binary(params: DpuParams) -> DpuParams:
    """Округление ширин каждой группы к {0, 100} нм."""
    return params.with_widths(quantize_widths(params.widths.detach()), binary=True)


def quantize_model(model: DgnnModel) -> DgnnModel:
    """Копия модели, у которой все DPU бинарные."""
    quantized = copy.deepcopy(model)
    with torch.no_grad():
        for widths in quantized.width_parameters():
            widths.copy_(quantize_widths(widths))
    quantized.binary = True
    quantized.straight_through = False
    logger.info(f"🔲 Модель квантована: {len(quantized.width_parameters())} DPU с бинарной модуляцией")
    return quantized


def perturb_coefficients(model: DgnnModel, sigma: float, seed: int) -> DgnnModel:
    """
    Копия модели с гауссовым шумом фазы и амплитуды мета-атомов.

    Шум добавляется к коэффициентам, а не к ширинам; амплитуда обрезается в [0, amplitude_max].

    Args:
        model: Обученная модель
        sigma: СКО шума
        seed: Зерно генератора шума

    Returns:
        DgnnModel: Модель с шумом во всех DPU
    """
    if sigma < 0:
        raise DomainException(f"sigma не может быть отрицательной: {sigma}")
    perturbed = copy.deepcopy(model)
    if sigma == 0:
        return perturbed

    generator = torch.Generator().manual_seed(seed)
    for name in perturbed.dpu_names():
        shape = tuple(perturbed.dpu_widths(name).shape)
        phase = torch.randn(shape, generator=generator, dtype=torch.float64) * sigma
        amplitude = torch.randn(shape, generator=generator, dtype=torch.float64) * sigma
        previous = perturbed.noise.get(name)
        if previous is not None:
            phase, amplitude = phase + previous.phase, amplitude + previous.amplitude
        perturbed.noise[name] = CoefficientNoise(phase=phase, amplitude=amplitude)

    logger.info(f"🎲 Шум коэффициентов sigma={sigma} (seed={seed}) добавлен в {len(perturbed.noise)} DPU")
    return perturbed
