"""
Модели реестра экспериментов.

Содержат запуски, поэпохную историю и точки свипов.
"""

from enum import Enum
from typing import List, Optional
from sqlalchemy import Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import Mapped, mapped_column, relationship

from .base import BaseModel


class RunStatus(str, Enum):
    """Статусы запуска."""

    RUNNING = "running"  # Обучение идет
    FINISHED = "finished"  # Отчет записан
    FAILED = "failed"  # Ошибка на одном из этапов


class ExperimentRun(BaseModel):
    """Модель одного запуска эксперимента."""

    __tablename__ = "experiment_runs"

    task: Mapped[str] = mapped_column(String(32), nullable=False, index=True, doc="Тип задачи")
    dataset: Mapped[str] = mapped_column(String(255), nullable=False, doc="Путь к данным или 'sbm'")
    model_kind: Mapped[str] = mapped_column(String(32), nullable=False, doc="dgnn_e, dgnn_o, mlp, ...")
    seed: Mapped[int] = mapped_column(Integer, nullable=False)
    config_json: Mapped[str] = mapped_column(Text, nullable=False, doc="Полная конфигурация в JSON")

    status: Mapped[RunStatus] = mapped_column(String(20), default=RunStatus.RUNNING, nullable=False)
    best_test_accuracy: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    final_test_accuracy: Mapped[Optional[float]] = mapped_column(Float, nullable=True)
    report_dir: Mapped[Optional[str]] = mapped_column(String(512), nullable=True)
    error: Mapped[Optional[str]] = mapped_column(Text, nullable=True)

    epochs: Mapped[List["EpochRecord"]] = relationship(
        back_populates="run", cascade="all, delete-orphan", order_by="EpochRecord.epoch"
    )

    def __repr__(self) -> str:
        return f"<ExperimentRun(task={self.task}, model={self.model_kind}, seed={self.seed}, status={self.status})>"

    @property
    def is_finished(self) -> bool:
        """Проверка, завершен ли запуск."""
        return self.status == RunStatus.FINISHED


class EpochRecord(BaseModel):
    """Запись истории обучения за одну эпоху."""

    __tablename__ = "epoch_records"

    run_id: Mapped[str] = mapped_column(String(36), ForeignKey("experiment_runs.id"), nullable=False, index=True)
    epoch: Mapped[int] = mapped_column(Integer, nullable=False)
    loss: Mapped[float] = mapped_column(Float, nullable=False)
    train_accuracy: Mapped[float] = mapped_column(Float, nullable=False)
    test_accuracy: Mapped[Optional[float]] = mapped_column(Float, nullable=True)

    run: Mapped[ExperimentRun] = relationship(back_populates="epochs")


class SweepPoint(BaseModel):
    """Точка свипа (одно значение оси)."""

    __tablename__ = "sweep_points"

    sweep_id: Mapped[str] = mapped_column(String(36), nullable=False, index=True)
    axis: Mapped[str] = mapped_column(String(32), nullable=False)
    value: Mapped[float] = mapped_column(Float, nullable=False)
    mean_accuracy: Mapped[float] = mapped_column(Float, nullable=False)
    std_accuracy: Mapped[float] = mapped_column(Float, nullable=False)
    repeats: Mapped[int] = mapped_column(Integer, nullable=False)
