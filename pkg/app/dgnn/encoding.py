"""
Кодирование атрибутов узлов в амплитуды входных волноводов.
"""

import math

import numpy as np
import torch

from app.core.exceptions import DomainException
from app.schemas.experiment import Encoding

_TOLERANCE = 1e-9

ENCODING_RANGES = {
    Encoding.AMPLITUDE: (0.0, 1.0),
    Encoding.PHASE: (0.0, 2.0 * math.pi),
}


def encode_attributes(x, encoding: Encoding) -> torch.Tensor:
    """
    Атрибуты -> комплексные амплитуды.

    Args:
        x: Атрибуты (..., n_attrs)
        encoding: amplitude (x + 0i) или phase (exp(ix))

    Returns:
        torch.Tensor: complex128 той же формы
    """
    encoding = Encoding(encoding)
    values = torch.as_tensor(np.asarray(x) if not isinstance(x, torch.Tensor) else x, dtype=torch.float64)
    low, high = ENCODING_RANGES[encoding]
    if values.numel() and (values.min() < low - _TOLERANCE or values.max() > high + _TOLERANCE):
        raise DomainException(f"Атрибуты вне диапазона [{low}, {high:.4f}] для кодирования {encoding.value}")

    if encoding == Encoding.AMPLITUDE:
        return values.to(torch.complex128)
    return torch.polar(torch.ones_like(values), values)
