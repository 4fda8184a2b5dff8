"""
Модель DGNN: головы DPU, read-out DPU и классификатор (электронный или оптический).
"""

import hashlib
from typing import Dict, List, Optional

import numpy as np
import torch
from loguru import logger
from torch import nn

from app.core.exceptions import ConfigurationException
from app.photonics import CoefficientNoise, DpuParams, MetaAtomLut, init_widths
from app.schemas.experiment import ClassifierKind, Encoding, ModelSpec, TaskKind
from app.schemas.geometry import DpuGeometry, DpuRole, preset_geometry

BINARY_THRESHOLD = 50.0


def quantize_widths(widths: torch.Tensor) -> torch.Tensor:
    """Ширина -> 0 или 100 нм, порог 50 (ровно 50 -> 100)."""
    return torch.where(widths >= BINARY_THRESHOLD, torch.full_like(widths, 100.0), torch.zeros_like(widths))


class ElectronicFc(nn.Module):
    """Полносвязный слой по детектированным интенсивностям: logits = I @ W + b."""

    def __init__(self, in_features: int, n_classes: int, generator: Optional[torch.Generator] = None):
        super().__init__()
        bound = 1.0 / np.sqrt(in_features)
        weight = (torch.rand(in_features, n_classes, generator=generator, dtype=torch.float64) * 2 - 1) * bound
        bias = (torch.rand(n_classes, generator=generator, dtype=torch.float64) * 2 - 1) * bound
        self.weight = nn.Parameter(weight)
        self.bias = nn.Parameter(bias)

    def forward(self, intensities: torch.Tensor) -> torch.Tensor:
        return intensities @ self.weight + self.bias


class DgnnModel(nn.Module):
    """
    Дифракционная графовая нейросеть.

    P голов DPU с общей геометрией (веса общие для всех узлов внутри головы),
    опциональные read-out DPU 2x2 на каждую голову для графовых задач и
    классификатор: ElectronicFc (DGNN-E) или классификационный DPU (DGNN-O).
    """

    def __init__(
        self,
        head_geometry: DpuGeometry,
        n_heads: int,
        n_classes: int,
        lut: MetaAtomLut,
        encoding: Encoding = Encoding.AMPLITUDE,
        classifier_kind: ClassifierKind = ClassifierKind.ELECTRONIC,
        classifier_geometry: Optional[DpuGeometry] = None,
        readout_geometry: Optional[DpuGeometry] = None,
        classifier_in: Optional[int] = None,
        top_k: Optional[int] = None,
        alpha: Optional[float] = None,
        generator: Optional[torch.Generator] = None
    ):
        super().__init__()
        self.head_geometry = head_geometry
        self.n_classes = int(n_classes)
        self.lut = lut
        self.encoding = Encoding(encoding)
        self.classifier_kind = ClassifierKind(classifier_kind)
        self.readout_geometry = readout_geometry
        self.classifier_geometry = classifier_geometry
        self.top_k = top_k
        self.alpha = alpha
        self.binary = False
        self.straight_through = False
        self.noise: Dict[str, CoefficientNoise] = {}

        if n_heads < 1:
            raise ConfigurationException("Нужна хотя бы одна голова DPU")
        self.head_widths = nn.ParameterList(
            [nn.Parameter(init_widths(head_geometry, generator)) for _ in range(n_heads)]
        )

        self.readout_widths = nn.ParameterList()
        if readout_geometry is not None:
            if readout_geometry.n_in != self.message_dim or readout_geometry.n_out != self.message_dim:
                raise ConfigurationException("Read-out DPU должен иметь m входов и m выходов")
            self.readout_widths.extend(
                [nn.Parameter(init_widths(readout_geometry, generator)) for _ in range(n_heads)]
            )

        in_features = classifier_in or self.feature_dim
        self.classifier: Optional[ElectronicFc] = None
        self.classifier_widths: Optional[nn.Parameter] = None
        if self.classifier_kind == ClassifierKind.ELECTRONIC:
            self.classifier = ElectronicFc(in_features, self.n_classes, generator)
        else:
            if classifier_geometry is None:
                raise ConfigurationException("DGNN-O требует геометрию классификационного DPU")
            if classifier_geometry.n_in != in_features or classifier_geometry.n_out != self.n_classes:
                raise ConfigurationException(
                    f"Классификационный DPU {classifier_geometry.n_in}->{classifier_geometry.n_out}, "
                    f"ожидается {in_features}->{self.n_classes}"
                )
            self.classifier_widths = nn.Parameter(init_widths(classifier_geometry, generator))

    @property
    def n_heads(self) -> int:
        return len(self.head_widths)

    @property
    def message_dim(self) -> int:
        return self.head_geometry.n_out

    @property
    def feature_dim(self) -> int:
        """P * m."""
        return self.n_heads * self.message_dim

    @property
    def has_readout(self) -> bool:
        return len(self.readout_widths) > 0

    def _dpu(self, name: str, geometry: DpuGeometry, widths: torch.Tensor) -> DpuParams:
        if self.straight_through and not self.binary:
            # вперед идут квантованные ширины, градиент - в непрерывные
            widths = quantize_widths(widths.detach()) + (widths - widths.detach())
        return DpuParams(
            geometry=geometry,
            widths=widths,
            binary=self.binary or self.straight_through,
            noise=self.noise.get(name),
        )

    def head_params(self, head: int) -> DpuParams:
        return self._dpu(f"head.{head}", self.head_geometry, self.head_widths[head])

    def readout_params(self, head: int) -> DpuParams:
        if not self.has_readout:
            raise ConfigurationException("У модели нет read-out DPU")
        return self._dpu(f"readout.{head}", self.readout_geometry, self.readout_widths[head])

    def classifier_params(self) -> DpuParams:
        if self.classifier_widths is None:
            raise ConfigurationException("У DGNN-E нет классификационного DPU")
        return self._dpu("classifier", self.classifier_geometry, self.classifier_widths)

    def dpu_names(self) -> List[str]:
        """Имена всех DPU в фиксированном порядке."""
        names = [f"head.{p}" for p in range(self.n_heads)]
        names += [f"readout.{p}" for p in range(len(self.readout_widths))]
        if self.classifier_widths is not None:
            names.append("classifier")
        return names

    def dpu_params(self, name: str) -> DpuParams:
        kind, _, index = name.partition(".")
        if kind == "head":
            return self.head_params(int(index))
        if kind == "readout":
            return self.readout_params(int(index))
        if kind == "classifier":
            return self.classifier_params()
        raise ConfigurationException(f"Неизвестный DPU: {name}")

    def dpu_widths(self, name: str) -> nn.Parameter:
        kind, _, index = name.partition(".")
        if kind == "head":
            return self.head_widths[int(index)]
        if kind == "readout":
            return self.readout_widths[int(index)]
        return self.classifier_widths

    def optical_parameters(self) -> List[nn.Parameter]:
        """Ширины голов и read-out DPU."""
        return list(self.head_widths) + list(self.readout_widths)

    def classifier_parameters(self) -> List[nn.Parameter]:
        """Параметры классификатора: веса FC или ширины классификационного DPU."""
        if self.classifier is not None:
            return list(self.classifier.parameters())
        return [self.classifier_widths]

    def width_parameters(self) -> List[nn.Parameter]:
        """Все ширины щелей (ограничены [0, 100] нм)."""
        params = self.optical_parameters()
        if self.classifier_widths is not None:
            params.append(self.classifier_widths)
        return params

    def set_optics_trainable(self, trainable: bool) -> None:
        for param in self.optical_parameters():
            param.requires_grad_(trainable)

    def optics_hash(self) -> str:
        """sha256 оптических ширин и шума (классификатор не входит)."""
        digest = hashlib.sha256()
        for name in self.dpu_names():
            if name == "classifier" and self.classifier_kind == ClassifierKind.OPTICAL:
                continue
            digest.update(name.encode())
            digest.update(self.dpu_widths(name).detach().cpu().numpy().tobytes())
            noise = self.noise.get(name)
            if noise is not None:
                digest.update(noise.phase.cpu().numpy().tobytes())
                digest.update(noise.amplitude.cpu().numpy().tobytes())
        return digest.hexdigest()


def build_model(
    spec: ModelSpec,
    n_attrs: int,
    n_classes: int,
    lut: MetaAtomLut,
    seed: int,
    task: TaskKind = TaskKind.NODE_TRANSDUCTIVE
) -> DgnnModel:
    """
    Сборка модели по ModelSpec и пресету геометрии.

    Args:
        spec: Параметры модели
        n_attrs: Размерность атрибутов (входов головы)
        n_classes: Количество классов
        lut: Таблица мета-атома
        seed: Зерно инициализации
        task: Тип задачи; graph_action добавляет read-out DPU

    Returns:
        DgnnModel: Модель со случайными ширинами
    """
    overrides = dict(spec.geometry_overrides)
    head = preset_geometry(spec.preset, DpuRole.HEAD, n_in=n_attrs, n_out=spec.message_dim, **overrides)
    feature_dim = spec.heads * spec.message_dim

    readout = None
    classifier_in = feature_dim
    if task == TaskKind.GRAPH_ACTION:
        if spec.message_dim != 2:
            raise ConfigurationException("Read-out DPU 2x2 требует message_dim = 2")
        if spec.classifier != ClassifierKind.ELECTRONIC:
            raise ConfigurationException("Action recognition использует электронный классификатор")
        readout = preset_geometry(spec.preset, DpuRole.READOUT, **overrides)
        classifier_in = spec.frames * feature_dim

    classifier_geometry = None
    if spec.classifier == ClassifierKind.OPTICAL:
        classifier_geometry = preset_geometry(
            spec.preset, DpuRole.CLASSIFIER, n_in=feature_dim, n_out=n_classes, **overrides
        )

    generator = torch.Generator().manual_seed(seed)
    model = DgnnModel(
        head_geometry=head,
        n_heads=spec.heads,
        n_classes=n_classes,
        lut=lut,
        encoding=spec.encoding,
        classifier_kind=spec.classifier,
        classifier_geometry=classifier_geometry,
        readout_geometry=readout,
        classifier_in=classifier_in,
        top_k=spec.top_k,
        alpha=spec.alpha,
        generator=generator,
    )
    logger.info(
        f"🧠 Модель DGNN-{'E' if spec.classifier == ClassifierKind.ELECTRONIC else 'O'}: "
        f"P={spec.heads}, m={spec.message_dim}, {head.num_layers} слоев x {head.atoms_per_line} атомов"
    )
    return model
