"""
Тесты скалярной оптики: распространение, металинии, порты, DPU, разветвители.
"""

import math

import numpy as np
import pytest
import torch
from scipy.special import hankel1

from app.core.exceptions import DomainException, FormatException, ShapeException
from app.photonics import (
    ComplexField1D,
    DpuParams,
    aggregate_tree,
    dpu_forward,
    init_widths,
    load_lut,
    port_modes,
    propagate,
    transfer_matrix,
    tree_depth,
    tree_scale,
    width_to_coefficient,
    y_couple,
)
from app.photonics.dpu import CoefficientNoise

WAVELENGTH = 1.55e-6
N_EFF = 2.85


class TestCouplers:
    def test_y_couple(self):
        assert y_couple(1.0, 1.0) == pytest.approx(math.sqrt(2.0))
        assert y_couple(1.0, -1.0) == 0.0

    @pytest.mark.parametrize("k, depth", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3)])
    def test_tree_depth(self, k, depth):
        assert tree_depth(k) == depth
        assert tree_scale(k) == pytest.approx(2.0 ** (-depth / 2))

    @pytest.mark.parametrize("k", [1, 2, 3, 5, 8])
    def test_aggregate_tree_is_scaled_sum(self, k):
        rng = np.random.default_rng(k)
        messages = torch.from_numpy(rng.normal(size=(k, 2)) + 1j * rng.normal(size=(k, 2)))
        result = aggregate_tree(messages)
        expected = messages.sum(dim=0) * tree_scale(k)
        assert torch.allclose(result, expected, atol=1e-14)

    def test_single_leaf_passes_through(self):
        message = torch.tensor([[1.0 + 2.0j, 3.0 - 1.0j]], dtype=torch.complex128)
        assert torch.equal(aggregate_tree(message), message[0])

    def test_empty_set(self):
        with pytest.raises(DomainException):
            aggregate_tree(torch.zeros((0, 2), dtype=torch.complex128))


class TestLut:
    def test_default_endpoints(self, lut):
        assert width_to_coefficient(0.0, lut).item() == pytest.approx(1.0 + 0.0j)
        assert width_to_coefficient(100.0, lut).item() == pytest.approx(complex(math.cos(1.55), math.sin(1.55)))

    def test_out_of_range(self, lut):
        with pytest.raises(DomainException):
            width_to_coefficient(100.5, lut)
        with pytest.raises(DomainException):
            width_to_coefficient(-0.1, lut)

    def test_noise_is_added_to_coefficients(self, lut):
        clean = width_to_coefficient(torch.tensor([50.0]), lut)
        noisy = width_to_coefficient(torch.tensor([50.0]), lut, phase_noise=torch.tensor([0.3]))
        assert torch.angle(noisy).item() == pytest.approx(torch.angle(clean).item() + 0.3)

    def test_amplitude_noise_clipped(self, lut):
        noisy = width_to_coefficient(torch.tensor([50.0]), lut, amplitude_noise=torch.tensor([5.0]))
        assert abs(noisy.item()) == pytest.approx(lut.amplitude_max)

    def test_load(self, tmp_path):
        path = tmp_path / "lut.txt"
        path.write_text("# metaatom-lut v1\n0 0.0 1.0\n50 0.7 0.9\n100 1.4\n", encoding="utf-8")
        lut = load_lut(path)
        assert lut.amplitude_of_width.tolist() == [1.0, 0.9, 1.0]
        assert width_to_coefficient(25.0, lut).item() == pytest.approx(0.95 * complex(math.cos(0.35), math.sin(0.35)))

    def test_malformed_line(self, tmp_path):
        path = tmp_path / "lut.txt"
        path.write_text("# metaatom-lut v1\n0 0.0\n50 abc\n100 1.0\n", encoding="utf-8")
        with pytest.raises(FormatException) as error:
            load_lut(path)
        assert error.value.line == 3

    def test_non_monotone_grid(self, tmp_path):
        path = tmp_path / "lut.txt"
        path.write_text("# metaatom-lut v1\n0 0.0\n60 0.5\n40 0.7\n100 1.0\n", encoding="utf-8")
        with pytest.raises(DomainException):
            load_lut(path)


class TestPropagation:
    def test_zero_distance_is_identity(self):
        field = ComplexField1D(samples=torch.ones(8, dtype=torch.complex128), pitch=1e-7)
        assert propagate(field, 0.0, WAVELENGTH, N_EFF) is field

    def test_negative_distance(self):
        field = ComplexField1D(samples=torch.ones(8, dtype=torch.complex128), pitch=1e-7)
        with pytest.raises(DomainException):
            propagate(field, -1e-6, WAVELENGTH, N_EFF)

    def test_power_conserved_for_propagating_band(self):
        n, pitch = 256, 75e-9
        x = np.arange(n)
        samples = sum(np.exp(2j * np.pi * b * x / n) * (1.0 + 0.5 * b) for b in (1, 3, -5, 9))
        field = ComplexField1D(samples=torch.from_numpy(samples), pitch=pitch)
        output = propagate(field, 30e-6, WAVELENGTH, N_EFF, pad_factor=1)
        assert abs(output.power().item() - field.power().item()) / field.power().item() < 1e-6

    def test_matches_rayleigh_sommerfeld(self):
        n, pitch, distance = 1024, 50e-9, 10e-6
        field = ComplexField1D(samples=torch.zeros(n, dtype=torch.complex128), pitch=pitch, origin=-n / 2 * pitch)
        x = field.coordinates()
        source = np.exp(-(x / 1e-6) ** 2).astype(np.complex128)
        field = field.with_samples(torch.from_numpy(source))
        spectral = propagate(field, distance, WAVELENGTH, N_EFF, pad_factor=4).samples.numpy()

        k = 2 * np.pi * N_EFF / WAVELENGTH
        r = np.sqrt((x[:, None] - x[None, :]) ** 2 + distance ** 2)
        kernel = 1j * k * distance / (2 * r) * hankel1(1, k * r)
        direct = kernel @ source * pitch

        error = np.linalg.norm(spectral - direct) / np.linalg.norm(direct)
        assert error <= 0.02

    def test_batch_axes(self):
        samples = torch.randn(3, 4, 32, dtype=torch.complex128)
        field = ComplexField1D(samples=samples, pitch=75e-9)
        output = propagate(field, 5e-6, WAVELENGTH, N_EFF, pad_factor=2)
        assert output.samples.shape == (3, 4, 32)
        single = propagate(ComplexField1D(samples=samples[1, 2], pitch=75e-9), 5e-6, WAVELENGTH, N_EFF, pad_factor=2)
        assert torch.allclose(output.samples[1, 2], single.samples, atol=1e-14)


class TestPorts:
    def test_modes_unit_power(self, small_geometry):
        modes = port_modes(small_geometry, small_geometry.n_in)
        power = (modes.abs() ** 2).sum(dim=1) * small_geometry.pitch
        assert torch.allclose(power, torch.ones(small_geometry.n_in, dtype=torch.float64), atol=1e-12)


class TestDpu:
    def test_params_shape(self, small_geometry):
        with pytest.raises(ShapeException):
            DpuParams(geometry=small_geometry, widths=torch.zeros(3, 4, dtype=torch.float64))

    def test_binary_params_reject_intermediate_widths(self, small_geometry):
        widths = torch.full((2, 4), 50.0, dtype=torch.float64)
        with pytest.raises(DomainException):
            DpuParams(geometry=small_geometry, widths=widths, binary=True)

    def test_wrong_input_count(self, small_geometry, lut):
        params = DpuParams(geometry=small_geometry, widths=torch.zeros(2, 4, dtype=torch.float64))
        with pytest.raises(ShapeException):
            dpu_forward(torch.ones(4, dtype=torch.complex128), params, lut)

    def test_linearity(self, small_geometry, lut):
        generator = torch.Generator().manual_seed(1)
        params = DpuParams(geometry=small_geometry, widths=init_widths(small_geometry, generator))
        a = torch.randn(3, dtype=torch.complex128, generator=generator)
        b = torch.randn(3, dtype=torch.complex128, generator=generator)
        alpha, beta = 0.7 - 0.2j, -1.3 + 0.4j
        combined = dpu_forward(alpha * a + beta * b, params, lut)
        separate = alpha * dpu_forward(a, params, lut) + beta * dpu_forward(b, params, lut)
        scale = max(1.0, combined.abs().max().item())
        assert (combined - separate).abs().max().item() <= 1e-12 * scale

    def test_transfer_matrix_matches_forward(self, small_geometry, lut):
        generator = torch.Generator().manual_seed(2)
        params = DpuParams(geometry=small_geometry, widths=init_widths(small_geometry, generator))
        inputs = torch.randn(5, 3, dtype=torch.complex128, generator=generator)
        matrix = transfer_matrix(params, lut)
        assert matrix.shape == (3, 2)
        assert torch.allclose(inputs @ matrix, dpu_forward(inputs, params, lut), atol=1e-13)

    def test_noise_changes_output(self, small_geometry, lut):
        widths = torch.full((2, 4), 30.0, dtype=torch.float64)
        clean = DpuParams(geometry=small_geometry, widths=widths)
        noise = CoefficientNoise(phase=torch.full((2, 4), 0.5, dtype=torch.float64), amplitude=torch.zeros(2, 4, dtype=torch.float64))
        noisy = DpuParams(geometry=small_geometry, widths=widths, noise=noise)
        inputs = torch.ones(3, dtype=torch.complex128)
        assert not torch.allclose(dpu_forward(inputs, clean, lut), dpu_forward(inputs, noisy, lut))

    def test_gradient_reaches_widths(self, small_geometry, lut):
        widths = torch.full((2, 4), 40.0, dtype=torch.float64, requires_grad=True)
        params = DpuParams(geometry=small_geometry, widths=widths)
        output = dpu_forward(torch.ones(3, dtype=torch.complex128), params, lut)
        (output.abs() ** 2).sum().backward()
        assert widths.grad is not None and torch.all(torch.isfinite(widths.grad))
