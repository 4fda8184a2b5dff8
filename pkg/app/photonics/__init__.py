"""
Скалярная одномерная дифракционная оптика: распространение, металинии, порты, разветвители.
"""

from .couplers import aggregate_tree, tree_depth, tree_scale, y_couple
from .dpu import CoefficientNoise, DpuParams, dpu_forward, init_widths, transfer_matrix
from .field import ComplexField1D, as_complex_tensor, propagate
from .lut import MetaAtomLut, default_lut, load_lut, width_to_coefficient, WIDTH_MAX, WIDTH_MIN
from .metaline import apply_metaline, expand_coefficients
from .ports import couple_ports, inject_ports, port_centers, port_modes

__all__ = [
    "aggregate_tree",
    "tree_depth",
    "tree_scale",
    "y_couple",
    "CoefficientNoise",
    "DpuParams",
    "dpu_forward",
    "init_widths",
    "transfer_matrix",
    "ComplexField1D",
    "as_complex_tensor",
    "propagate",
    "MetaAtomLut",
    "default_lut",
    "load_lut",
    "width_to_coefficient",
    "WIDTH_MAX",
    "WIDTH_MIN",
    "apply_metaline",
    "expand_coefficients",
    "couple_ports",
    "inject_ports",
    "port_centers",
    "port_modes",
]
