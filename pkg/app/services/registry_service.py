"""
Сервис реестра запусков.

Содержит запись запусков, поэпохной истории и точек свипов в базу данных.
"""

from typing import List, Optional
from sqlalchemy import select
from sqlalchemy.orm import Session
from loguru import logger

from app.models import EpochRecord, ExperimentRun, RunStatus, SweepPoint
from app.train.history import EpochStats


class RegistryService:
    """Сервис реестра запусков."""

    def __init__(self, session: Session):
        """
        Инициализация сервиса.

        Args:
            session: Сессия базы данных
        """
        self.session = session

    def start_run(self, task: str, dataset: str, model_kind: str, seed: int, config_json: str) -> ExperimentRun:
        """
        Регистрация нового запуска.

        Args:
            task: Тип задачи
            dataset: Источник данных
            model_kind: Тип модели
            seed: Зерно
            config_json: Конфигурация в JSON

        Returns:
            ExperimentRun: Созданный запуск
        """
        try:
            run = ExperimentRun(
                task=task,
                dataset=dataset,
                model_kind=model_kind,
                seed=seed,
                config_json=config_json,
                status=RunStatus.RUNNING,
            )
            self.session.add(run)
            self.session.commit()
            logger.debug(f"Запуск зарегистрирован: {run.id} ({task}, {model_kind}, seed={seed})")
            return run
        except Exception as e:
            logger.error(f"Ошибка регистрации запуска: {e}")
            self.session.rollback()
            raise

    def record_epoch(self, run_id: str, stats: EpochStats) -> None:
        """Запись одной эпохи (без commit, фиксируется в finish_run)."""
        self.session.add(
            EpochRecord(
                run_id=run_id,
                epoch=stats.epoch,
                loss=stats.loss,
                train_accuracy=stats.train_accuracy,
                test_accuracy=stats.test_accuracy,
            )
        )

    def finish_run(
        self,
        run_id: str,
        best_test_accuracy: Optional[float],
        final_test_accuracy: Optional[float],
        report_dir: str
    ) -> ExperimentRun:
        """Отметка успешного завершения."""
        try:
            run = self.session.get(ExperimentRun, run_id)
            run.status = RunStatus.FINISHED
            run.best_test_accuracy = best_test_accuracy
            run.final_test_accuracy = final_test_accuracy
            run.report_dir = report_dir
            self.session.commit()
            logger.info(f"✅ Запуск {run_id} завершен: best={best_test_accuracy}, final={final_test_accuracy}")
            return run
        except Exception as e:
            logger.error(f"Ошибка завершения запуска {run_id}: {e}")
            self.session.rollback()
            raise

    def fail_run(self, run_id: str, error: str) -> None:
        """Отметка запуска как неудачного."""
        try:
            run = self.session.get(ExperimentRun, run_id)
            run.status = RunStatus.FAILED
            run.error = error
            self.session.commit()
        except Exception as e:
            logger.error(f"Ошибка записи неудачного запуска {run_id}: {e}")
            self.session.rollback()
            raise

    def record_sweep_point(self, sweep_id: str, axis: str, value: float, mean: float, std: float, repeats: int) -> SweepPoint:
        """Запись точки свипа."""
        point = SweepPoint(
            sweep_id=sweep_id, axis=axis, value=value, mean_accuracy=mean, std_accuracy=std, repeats=repeats
        )
        self.session.add(point)
        self.session.commit()
        return point

    def list_runs(self, limit: int = 20) -> List[ExperimentRun]:
        """Последние запуски, новые первыми."""
        result = self.session.execute(
            select(ExperimentRun).order_by(ExperimentRun.created_at.desc()).limit(limit)
        )
        return list(result.scalars().all())

    def get_epochs(self, run_id: str) -> List[EpochRecord]:
        result = self.session.execute(
            select(EpochRecord).where(EpochRecord.run_id == run_id).order_by(EpochRecord.epoch)
        )
        return list(result.scalars().all())
