"""
История обучения по эпохам.
"""

from dataclasses import dataclass, field
from typing import List, Optional


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    train_accuracy: float
    test_accuracy: Optional[float]


@dataclass
class TrainHistory:
    """Записи эпох и лучшая эпоха по test accuracy (или train, если теста нет)."""

    entries: List[EpochStats] = field(default_factory=list)

    def append(self, stats: EpochStats) -> None:
        self.entries.append(stats)

    def __len__(self) -> int:
        return len(self.entries)

    @staticmethod
    def _score(stats: EpochStats) -> float:
        return stats.test_accuracy if stats.test_accuracy is not None else stats.train_accuracy

    @property
    def best(self) -> Optional[EpochStats]:
        """Первая эпоха с максимальной точностью."""
        best = None
        for stats in self.entries:
            if best is None or self._score(stats) > self._score(best):
                best = stats
        return best

    @property
    def final(self) -> Optional[EpochStats]:
        return self.entries[-1] if self.entries else None

    def is_best(self, stats: EpochStats) -> bool:
        return self.best is stats
