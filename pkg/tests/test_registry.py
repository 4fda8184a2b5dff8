"""
Тесты реестра запусков.
"""

import pytest

from app.core.database import close_database, get_db_session, init_database
from app.core.exceptions import PipelineException
from app.models import ExperimentRun, RunStatus
from app.schemas.experiment import ExperimentConfig, SbmSpec
from app.schemas.training import TrainConfig
from app.services import ExperimentService, RegistryService
from app.train import EpochStats
from tests.helpers import small_spec


@pytest.fixture
def registry(registry_session):
    return RegistryService(registry_session)


@pytest.fixture
def memory_database():
    init_database("sqlite://")
    yield
    close_database()


def _start(registry: RegistryService, seed: int = 0) -> ExperimentRun:
    return registry.start_run(
        task="node_transductive", dataset="sbm", model_kind="dgnn_e", seed=seed, config_json="{}"
    )


class TestRegistryService:
    def test_start_run(self, registry):
        run = _start(registry)
        assert run.id is not None
        assert run.status == RunStatus.RUNNING
        assert not run.is_finished

    def test_epochs_and_finish(self, registry):
        run = _start(registry)
        for epoch in (2, 1):
            registry.record_epoch(run.id, EpochStats(epoch=epoch, loss=1.0 / epoch, train_accuracy=0.5, test_accuracy=None))
        finished = registry.finish_run(run.id, 0.8, 0.75, "reports/run")

        assert finished.is_finished
        assert finished.best_test_accuracy == 0.8
        assert finished.report_dir == "reports/run"
        epochs = registry.get_epochs(run.id)
        assert [record.epoch for record in epochs] == [1, 2]
        assert epochs[0].test_accuracy is None

    def test_fail_run(self, registry):
        run = _start(registry)
        registry.fail_run(run.id, "boom")
        stored = registry.session.get(ExperimentRun, run.id)
        assert stored.status == RunStatus.FAILED
        assert stored.error == "boom"

    def test_list_runs(self, registry):
        ids = {_start(registry, seed).id for seed in range(3)}
        assert {run.id for run in registry.list_runs()} == ids
        assert len(registry.list_runs(limit=2)) == 2

    def test_sweep_point(self, registry):
        point = registry.record_sweep_point("sweep-1", "k", 4.0, 0.7, 0.05, 10)
        assert point.id is not None
        assert point.mean_accuracy == 0.7


class TestExperimentRegistry:
    def _config(self, tmp_path, **kwargs) -> ExperimentConfig:
        params = dict(
            sbm=SbmSpec(n=30, n_classes=3, p=0.5, q=0.02),
            model=small_spec(),
            train=TrainConfig(epochs=3, log_every=0),
            output_dir=str(tmp_path),
        )
        params.update(kwargs)
        return ExperimentConfig(**params)

    def test_run_is_recorded(self, tmp_path, memory_database):
        result = ExperimentService(registry_enabled=True, progress=False).run(self._config(tmp_path))
        with get_db_session() as session:
            registry = RegistryService(session)
            (run,) = registry.list_runs()
            assert run.is_finished
            assert run.model_kind == "dgnn_e"
            assert run.report_dir == str(result.report_dir)
            assert run.final_test_accuracy == pytest.approx(result.metrics["test_accuracy"])
            assert [record.epoch for record in registry.get_epochs(run.id)] == [1, 2, 3]

    def test_failed_run_is_recorded(self, tmp_path, memory_database):
        config = ExperimentConfig(dataset=str(tmp_path / "missing"), model=small_spec(), output_dir=str(tmp_path))
        with pytest.raises(PipelineException):
            ExperimentService(registry_enabled=True, progress=False).run(config)
        with get_db_session() as session:
            (run,) = RegistryService(session).list_runs()
            assert run.status == RunStatus.FAILED
            assert "data" in run.error
