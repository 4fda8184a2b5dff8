"""
Тесты обучения: потери, Adam с проекцией, проверка градиентов, цикл обучения.
"""

import math

import numpy as np
import pytest
import torch

from app.core.exceptions import ConfigurationException, DomainException, ShapeException
from app.dataio import generate_synthetic_skeletons, normalize_skeletons
from app.dgnn import build_model, perturb_coefficients, quantize_model, subsequence_windows
from app.graphs import graph_ppr_table
from app.schemas.training import LossKind, TrainConfig
from app.services import TrainingService, accuracy
from app.train import (
    EpochStats,
    GradcheckReport,
    NodeBatch,
    SequenceBatch,
    TrainHistory,
    adam_step,
    backward,
    gradcheck,
    loss_mse_onehot,
    loss_softmax_ce,
)
from tests.helpers import small_spec


def _table(graph):
    return graph_ppr_table(graph, 4, 0.25)


def _config(**kwargs) -> TrainConfig:
    params = dict(epochs=5, learning_rate=0.05, log_every=0)
    params.update(kwargs)
    return TrainConfig(**params)


class TestLosses:
    def test_softmax_ce_uniform(self):
        loss = loss_softmax_ce(torch.zeros(2, 3, dtype=torch.float64), [0, 2])
        assert loss.item() == pytest.approx(math.log(3.0))

    def test_mse_onehot(self):
        intensities = torch.tensor([[1.0, 0.0], [0.0, 0.0]], dtype=torch.float64)
        assert loss_mse_onehot(intensities, [0, 1]).item() == pytest.approx(0.25)

    def test_label_out_of_range(self):
        with pytest.raises(DomainException):
            loss_softmax_ce(torch.zeros(2, 3), [0, 3])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeException):
            loss_mse_onehot(torch.zeros(2, 3), [0, 1, 2])


class TestAdam:
    def test_first_step_moves_by_lr(self):
        params = [torch.tensor([50.0, 50.0], dtype=torch.float64)]
        grads = [torch.tensor([1.0, -2.0], dtype=torch.float64)]
        (updated,), state = adam_step(params, grads, lr=0.5)
        assert updated.tolist() == pytest.approx([49.5, 50.5])
        assert state["state"][0]["step"] == 1

    def test_state_carries_moments(self):
        params = [torch.tensor([50.0], dtype=torch.float64)]
        _, state = adam_step(params, [torch.tensor([1.0], dtype=torch.float64)], lr=0.5)
        (updated,), state = adam_step(params, [torch.tensor([1.0], dtype=torch.float64)], state, lr=0.5)
        assert updated.item() == pytest.approx(49.0)
        assert state["state"][0]["step"] == 2

    def test_projection(self):
        params = [torch.tensor([99.9, 0.1], dtype=torch.float64)]
        grads = [torch.tensor([-1.0, 1.0], dtype=torch.float64)]
        (updated,), _ = adam_step(params, grads, lr=1.0)
        assert updated.tolist() == [100.0, 0.0]

    def test_no_projection(self):
        params = [torch.tensor([99.9], dtype=torch.float64)]
        (updated,), _ = adam_step(params, [torch.tensor([-1.0], dtype=torch.float64)], lr=1.0, bounds=None)
        assert updated.item() == pytest.approx(100.9)


class TestGradients:
    def test_backward_shapes(self, tiny_sbm, small_model):
        batch = NodeBatch.from_mask(tiny_sbm, _table(tiny_sbm), small_model, tiny_sbm.train_mask)
        grads = backward(small_model, batch, LossKind.SOFTMAX_CE)
        assert set(grads.d_widths) == {"head.0", "head.1"}
        assert grads.d_widths["head.0"].shape == small_model.head_widths[0].shape
        assert [g.shape for g in grads.d_classifier] == [p.shape for p in small_model.classifier_parameters()]
        assert grads.max_abs() > 0

    def test_gradcheck_electronic(self, tiny_sbm, small_model):
        batch = NodeBatch.from_mask(tiny_sbm, _table(tiny_sbm), small_model, tiny_sbm.train_mask)
        report = gradcheck(small_model, batch, LossKind.SOFTMAX_CE, samples=10)
        assert len(report.entries) == 10
        assert report.passed, report.entries

    def test_gradcheck_optical(self, tiny_sbm, small_optical_model):
        batch = NodeBatch.from_mask(tiny_sbm, _table(tiny_sbm), small_optical_model, tiny_sbm.train_mask)
        report = gradcheck(small_optical_model, batch, LossKind.MSE_ONEHOT, samples=10)
        assert {entry[0] for entry in report.entries} <= {"head.0", "head.1", "classifier"}
        assert report.passed, report.entries

    @pytest.mark.parametrize("classifier, loss", [
        ("electronic", LossKind.SOFTMAX_CE),
        ("optical", LossKind.MSE_ONEHOT),
    ])
    def test_gradcheck_hundred_widths(self, tiny_sbm, lut, classifier, loss):
        # синтетическая геометрия: 3 слоя по 30 групп на голову
        spec = small_spec(classifier=classifier, geometry_overrides=dict(oversample=2))
        model = build_model(spec, n_attrs=3, n_classes=3, lut=lut, seed=0)
        assert sum(model.dpu_widths(name).numel() for name in model.dpu_names()) >= 100

        batch = NodeBatch.from_mask(tiny_sbm, _table(tiny_sbm), model, tiny_sbm.train_mask)
        report = gradcheck(model, batch, loss, samples=100)
        assert len(report.entries) == 100
        assert max(e[5] for e in report.entries) <= 1e-4
        assert report.passed

    def test_report_enforces_relative_error(self):
        report = GradcheckReport(entries=[("head.0", 0, 0, 1e-9, 1.1e-9, 0.1)])
        assert not report.passed
        report = GradcheckReport(entries=[("head.0", 0, 0, 0.0, 1e-13, 1e-5)])
        assert report.passed
        report = GradcheckReport(entries=[("head.0", 0, 0, 0.0, 1e-6, 100.0)])
        assert not report.passed

    def test_gradcheck_rejects_binary(self, tiny_sbm, small_model):
        binary = quantize_model(small_model)
        batch = NodeBatch.from_mask(tiny_sbm, _table(tiny_sbm), binary, tiny_sbm.train_mask)
        with pytest.raises(ConfigurationException):
            gradcheck(binary, batch, LossKind.SOFTMAX_CE, samples=2)


class TestHistory:
    def test_best_is_first_maximum(self):
        history = TrainHistory()
        for epoch, test in enumerate([0.5, 0.8, 0.8, 0.6], start=1):
            history.append(EpochStats(epoch=epoch, loss=1.0 / epoch, train_accuracy=0.9, test_accuracy=test))
        assert history.best.epoch == 2
        assert history.final.epoch == 4
        assert len(history) == 4

    def test_train_accuracy_without_test(self):
        history = TrainHistory()
        history.append(EpochStats(epoch=1, loss=1.0, train_accuracy=0.4, test_accuracy=None))
        history.append(EpochStats(epoch=2, loss=0.5, train_accuracy=0.7, test_accuracy=None))
        assert history.best.epoch == 2

    def test_empty(self):
        assert TrainHistory().best is None


class TestFit:
    def test_history_and_bounds(self, tiny_sbm, small_model):
        model, history = TrainingService(progress=False).fit(small_model, tiny_sbm, _table(tiny_sbm), _config())
        assert len(history) == 5
        for widths in model.width_parameters():
            assert widths.min().item() >= 0.0 and widths.max().item() <= 100.0

    def test_best_epoch_restored(self, tiny_sbm, small_model):
        table = _table(tiny_sbm)
        model, history = TrainingService(progress=False).fit(small_model, tiny_sbm, table, _config(epochs=8))
        test_batch = NodeBatch.from_mask(tiny_sbm, table, model, tiny_sbm.test_mask)
        assert accuracy(model, test_batch) == history.best.test_accuracy

    def test_deterministic(self, tiny_sbm, lut):
        runs = []
        for _ in range(2):
            model = build_model(small_spec(), n_attrs=3, n_classes=3, lut=lut, seed=2)
            _, history = TrainingService(progress=False).fit(model, tiny_sbm, _table(tiny_sbm), _config())
            runs.append([stats.loss for stats in history.entries])
        assert runs[0] == runs[1]

    def test_frozen_optics(self, tiny_sbm, small_model):
        before = small_model.optics_hash()
        weight = small_model.classifier.weight.detach().clone()
        model, _ = TrainingService(progress=False).fit(
            small_model, tiny_sbm, _table(tiny_sbm), _config(optics_trainable=False)
        )
        assert model.optics_hash() == before
        assert not torch.equal(model.classifier.weight.detach(), weight)
        assert all(p.requires_grad for p in model.optical_parameters())

    def test_binary_training(self, tiny_sbm, small_model):
        model, history = TrainingService(progress=False).fit(
            small_model, tiny_sbm, _table(tiny_sbm), _config(binary_training=True)
        )
        assert model.binary and not model.straight_through
        for widths in model.width_parameters():
            values = widths.detach()
            assert torch.all((values == 0.0) | (values == 100.0))

    def test_optical_mse(self, tiny_sbm, small_optical_model):
        model, history = TrainingService(progress=False).fit(
            small_optical_model, tiny_sbm, _table(tiny_sbm), _config(loss=LossKind.MSE_ONEHOT)
        )
        assert all(np.isfinite(stats.loss) for stats in history.entries)

    def test_epoch_callback(self, tiny_sbm, small_model):
        seen = []
        TrainingService(on_epoch=seen.append, progress=False).fit(
            small_model, tiny_sbm, _table(tiny_sbm), _config(epochs=3)
        )
        assert [stats.epoch for stats in seen] == [1, 2, 3]

    def test_no_training_labels(self, tiny_sbm, small_model):
        graph = tiny_sbm.with_split(np.zeros(30, dtype=bool), tiny_sbm.test_mask)
        with pytest.raises(ConfigurationException):
            TrainingService(progress=False).fit(small_model, graph, _table(graph), _config())


class TestRetrain:
    def test_optics_unchanged(self, tiny_sbm, small_model):
        noisy = perturb_coefficients(small_model, 0.2, seed=0)
        before = noisy.optics_hash()
        retrained, history = TrainingService(progress=False).retrain_classifier(
            noisy, tiny_sbm, _table(tiny_sbm), _config(learning_rate=0.1)
        )
        assert retrained.optics_hash() == before
        assert retrained is not noisy
        assert not torch.equal(retrained.classifier.weight, noisy.classifier.weight)
        assert len(history) == 5

    def test_binary_optical_classifier(self, tiny_sbm, small_optical_model):
        binary = quantize_model(small_optical_model)
        with pytest.raises(ConfigurationException):
            TrainingService(progress=False).retrain_classifier(binary, tiny_sbm, _table(tiny_sbm), _config())


def test_synthetic_skeletons_are_overfit(small_action_model):
    sequences, _ = normalize_skeletons(generate_synthetic_skeletons(per_class=2, frames=8, seed=0))
    assert len(sequences) == 12
    windows = [subsequence_windows(s.frames, 6) for s in sequences]
    labels = np.concatenate([np.full(len(w), s.action) for w, s in zip(windows, sequences)])
    batch = SequenceBatch(windows=np.concatenate(windows), labels=torch.as_tensor(labels, dtype=torch.int64))
    assert len(batch) == 36

    _, history = TrainingService(progress=False).fit_action(
        small_action_model, batch, None, _config(epochs=300, batch=12)
    )
    assert history.best.train_accuracy == 1.0
