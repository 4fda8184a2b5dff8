"""
Скелетные последовательности: формат UTKinect, нормализованный bundle, синтетика, фолды по субъектам.
"""

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from sklearn.preprocessing import MinMaxScaler

from app.core.exceptions import DomainException, FormatException
from app.dataio.files import atomic_write_text, format_float
from app.dataio.pca import TARGET_RANGES
from app.graphs.skeleton import N_JOINTS

ACTIONS = ["walk", "sitDown", "standUp", "pickUp", "waveHands", "clapHands"]
SKELETON_HEADER = "# skeleton-bundle v1"
VALUES_PER_FRAME = N_JOINTS * 3


@dataclass(eq=False)
class SkeletonSequence:
    """Одно видео: кадры (T, 20, 3), действие, субъект и повтор."""

    frames: np.ndarray
    action: int
    subject: int
    repetition: int = 1

    @property
    def group(self) -> Tuple[int, int]:
        """Единица кросс-валидации: (субъект, повтор)."""
        return self.subject, self.repetition

    @property
    def n_frames(self) -> int:
        return int(self.frames.shape[0])


def _parse_floats(parts: Sequence[str], path: Path, number: int) -> List[float]:
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise FormatException("нечисловое значение", str(path), number)


def _parse_action_labels(path: Path) -> Dict[str, List[Tuple[str, int, int]]]:
    """actionLabel.txt: строка видео `sXX_eYY`, затем строки `action: start end`."""
    segments: Dict[str, List[Tuple[str, int, int]]] = {}
    current = None
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if ":" not in line:
            current = line
            segments[current] = []
            continue
        if current is None:
            raise FormatException("сегмент до имени видео", str(path), number)
        name, _, bounds = line.partition(":")
        parts = bounds.split()
        if len(parts) != 2:
            raise FormatException("ожидается 'action: start end'", str(path), number)
        if "NaN" in parts:
            continue
        start, end = (int(float(p)) for p in parts)
        segments[current].append((name.strip(), start, end))
    return segments


def _parse_joint_file(path: Path) -> Tuple[np.ndarray, np.ndarray]:
    """joints_sXX_eYY.txt: номер кадра и 60 координат в строке."""
    indices, frames = [], []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        values = _parse_floats(line.split(), path, number)
        if len(values) != VALUES_PER_FRAME + 1:
            raise FormatException(f"ожидается {VALUES_PER_FRAME + 1} чисел в кадре", str(path), number)
        indices.append(int(values[0]))
        frames.append(np.asarray(values[1:]).reshape(N_JOINTS, 3))
    return np.asarray(indices, dtype=np.int64), np.asarray(frames).reshape(-1, N_JOINTS, 3)


def _load_utkinect(root: Path) -> List[SkeletonSequence]:
    segments = _parse_action_labels(root / "actionLabel.txt")
    joints_dir = root / "joints" if (root / "joints").is_dir() else root
    sequences = []
    for video, video_segments in segments.items():
        subject, repetition = (int(p[1:]) for p in video.split("_"))
        indices, frames = _parse_joint_file(joints_dir / f"joints_{video}.txt")
        for name, start, end in video_segments:
            if name not in ACTIONS:
                continue
            selected = (indices >= start) & (indices <= end)
            if not selected.any():
                continue
            sequences.append(SkeletonSequence(frames[selected], ACTIONS.index(name), subject, repetition))
    return sequences


def _load_bundle(path: Path) -> List[SkeletonSequence]:
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != SKELETON_HEADER:
        raise FormatException(f"ожидается заголовок '{SKELETON_HEADER}'", str(path), 1)
    grouped: Dict[Tuple[int, int, str], List[Tuple[int, np.ndarray]]] = {}
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4 + VALUES_PER_FRAME:
            raise FormatException(f"ожидается {4 + VALUES_PER_FRAME} полей", str(path), number)
        subject, repetition, frame = (int(_parse_floats([p], path, number)[0]) for p in (parts[0], parts[1], parts[3]))
        coords = np.asarray(_parse_floats(parts[4:], path, number)).reshape(N_JOINTS, 3)
        grouped.setdefault((subject, repetition, parts[2]), []).append((frame, coords))

    sequences = []
    for (subject, repetition, name), frames in grouped.items():
        if name not in ACTIONS:
            continue
        frames.sort(key=lambda item: item[0])
        stacked = np.stack([coords for _, coords in frames])
        sequences.append(SkeletonSequence(stacked, ACTIONS.index(name), subject, repetition))
    return sequences


def load_skeleton_dataset(path: Union[str, Path]) -> List[SkeletonSequence]:
    """
    Загрузка скелетных последовательностей с фильтром шести действий.

    Args:
        path: Директория UTKinect (actionLabel.txt + joints/) или файл `# skeleton-bundle v1`

    Returns:
        List[SkeletonSequence]: Видео, по одному на (субъект, повтор, действие)
    """
    path = Path(path)
    if path.is_dir():
        sequences = _load_utkinect(path)
    else:
        sequences = _load_bundle(path)
    sequences.sort(key=lambda s: (s.subject, s.repetition, s.action))
    logger.info(f"🦴 Загружено {len(sequences)} скелетных видео из {path}")
    return sequences


def save_skeleton_bundle(sequences: Sequence[SkeletonSequence], path: Union[str, Path]) -> Path:
    """Запись последовательностей в формате `# skeleton-bundle v1`."""
    lines = [SKELETON_HEADER]
    for sequence in sequences:
        name = ACTIONS[sequence.action]
        for frame, coords in enumerate(sequence.frames):
            values = " ".join(format_float(v) for v in coords.ravel())
            lines.append(f"{sequence.subject} {sequence.repetition} {name} {frame} {values}")
    return atomic_write_text(path, "\n".join(lines) + "\n")


def kfold_by_subject(sequences: Sequence[SkeletonSequence], folds: int = 5, seed: int = 0) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Разбиение на фолды по группам (субъект, повтор).

    Args:
        sequences: Видео
        folds: Количество фолдов
        seed: Зерно перемешивания групп

    Returns:
        List[Tuple[np.ndarray, np.ndarray]]: Индексы видео (train, test) каждого фолда
    """
    groups = sorted({s.group for s in sequences})
    if folds < 2 or len(groups) % folds != 0:
        raise DomainException(f"{len(groups)} групп не делятся на {folds} фолдов")
    order = np.random.default_rng(seed).permutation(len(groups))
    per_fold = len(groups) // folds
    membership = np.array([groups.index(s.group) for s in sequences])

    assignments = []
    for fold in range(folds):
        test_groups = order[fold * per_fold:(fold + 1) * per_fold]
        test = np.isin(membership, test_groups)
        assignments.append((np.flatnonzero(~test), np.flatnonzero(test)))
    return assignments


def normalize_skeletons(
    sequences: Sequence[SkeletonSequence],
    fit_indices: Optional[Sequence[int]] = None,
    target_range: str = "unit"
) -> Tuple[List[SkeletonSequence], MinMaxScaler]:
    """
    Min-max масштабирование координат по осям x, y, z в диапазон кодирования.

    Args:
        sequences: Видео
        fit_indices: Видео для оценки диапазона (train фолда); None - все
        target_range: unit или two_pi

    Returns:
        Tuple[List[SkeletonSequence], MinMaxScaler]: Нормированные копии и масштаб
    """
    fit_set = [sequences[i] for i in fit_indices] if fit_indices is not None else list(sequences)
    scaler = MinMaxScaler(feature_range=TARGET_RANGES[target_range], clip=True)
    scaler.fit(np.concatenate([s.frames.reshape(-1, 3) for s in fit_set]))
    normalized = [
        replace(s, frames=scaler.transform(s.frames.reshape(-1, 3)).reshape(s.frames.shape))
        for s in sequences
    ]
    return normalized, scaler


_TEMPLATE = np.array([
    [0.0, 0.0, 2.5], [0.0, 0.2, 2.5], [0.0, 0.45, 2.5], [0.0, 0.65, 2.5],
    [-0.18, 0.4, 2.5], [-0.3, 0.15, 2.5], [-0.35, -0.05, 2.5], [-0.37, -0.12, 2.5],
    [0.18, 0.4, 2.5], [0.3, 0.15, 2.5], [0.35, -0.05, 2.5], [0.37, -0.12, 2.5],
    [-0.1, -0.05, 2.5], [-0.12, -0.45, 2.5], [-0.12, -0.85, 2.5], [-0.12, -0.92, 2.45],
    [0.1, -0.05, 2.5], [0.12, -0.45, 2.5], [0.12, -0.85, 2.5], [0.12, -0.92, 2.45],
])


def generate_synthetic_skeletons(
    per_class: int,
    frames: int,
    seed: int,
    n_classes: int = len(ACTIONS),
    n_subjects: int = 5,
    noise: float = 0.01
) -> List[SkeletonSequence]:
    """
    Синтетические видео: у каждого класса свое смещение поз суставов и свой темп движения.

    Args:
        per_class: Видео на класс
        frames: Кадров в видео
        seed: Зерно генератора
        n_classes: Количество классов
        n_subjects: Субъекты, по кругу назначаемые видео

    Returns:
        List[SkeletonSequence]: Видео
    """
    rng = np.random.default_rng(seed)
    time = np.arange(frames)[:, None, None]
    sequences = []
    for action in range(n_classes):
        offset = np.zeros((N_JOINTS, 3))
        moving = rng.choice(N_JOINTS, size=4, replace=False)
        offset[moving] = rng.normal(0.0, 0.25, size=(4, 3))
        frequency = 2 * math.pi * (action + 1) / (3 * frames)
        for index in range(per_class):
            sway = 0.05 * np.sin(frequency * time + rng.uniform(0, 2 * math.pi)) * (offset != 0)
            coords = _TEMPLATE + offset + sway + rng.normal(0.0, noise, size=(frames, N_JOINTS, 3))
            sequences.append(SkeletonSequence(coords, action, subject=index % n_subjects + 1))
    return sequences
