"""
Тесты электронных моделей сравнения.
"""

import numpy as np
import pytest
import torch

from app.baselines import LinearClassifier, MlpModel, PprGoModel, PprGoVariant
from app.core.exceptions import ShapeException
from app.graphs import graph_ppr_table
from app.schemas.training import BaselineConfig
from app.services import BaselineService


@pytest.fixture
def separable():
    rng = np.random.default_rng(0)
    labels = np.repeat([0, 1, 2], 20)
    centers = np.eye(3) * 3.0
    features = centers[labels] + rng.normal(0.0, 0.2, size=(60, 3))
    train = np.zeros(60, dtype=bool)
    train[rng.permutation(60)[:30]] = True
    return features, labels, train, ~train


@pytest.fixture
def service():
    config = BaselineConfig(epochs=300, learning_rate=0.05, hidden=8, weight_decays=[0.0, 1e-3])
    return BaselineService(config, progress=False)


class TestModels:
    def test_shapes(self):
        features = torch.rand(5, 4, dtype=torch.float64)
        assert LinearClassifier(4, 3)(features).shape == (5, 3)
        assert MlpModel(4, 3, hidden=6)(features).shape == (5, 3)

    def test_pprgo_sum(self):
        torch.manual_seed(0)
        model = PprGoModel(4, 3, hidden=6, variant=PprGoVariant.SUM)
        features = torch.rand(5, 4, dtype=torch.float64)
        indices = torch.tensor([[0, 1], [2, 4]])
        scores = torch.tensor([[0.7, 0.3], [0.5, 0.5]], dtype=torch.float64)
        logits = model(features, indices, scores)
        per_node = model.mlp(features)
        assert torch.allclose(logits[0], per_node[0] + per_node[1])

    def test_pprgo_weighted(self):
        torch.manual_seed(0)
        model = PprGoModel(4, 3, hidden=6, variant=PprGoVariant.WEIGHTED_SUM)
        features = torch.rand(5, 4, dtype=torch.float64)
        indices = torch.tensor([[0, 1]])
        scores = torch.tensor([[0.7, 0.3]], dtype=torch.float64)
        per_node = model.mlp(features)
        assert torch.allclose(model(features, indices, scores)[0], 0.7 * per_node[0] + 0.3 * per_node[1])

    def test_pprgo_shape_mismatch(self):
        model = PprGoModel(4, 3)
        with pytest.raises(ShapeException):
            model(torch.rand(5, 4, dtype=torch.float64), torch.zeros((2, 2), dtype=torch.int64), torch.zeros(2, 3))


class TestService:
    def test_linear(self, service, separable):
        features, labels, train, test = separable
        result = service.fit_linear_on_pca(features, labels, train, test)
        assert result.test_accuracy == 1.0
        assert set(result.accuracy_by_decay) == {0.0, 1e-3}

    def test_mlp(self, service, separable):
        features, labels, train, test = separable
        result = service.fit_mlp(features, labels, train, test)
        assert result.train_accuracy >= 0.9
        assert result.weight_decay in (0.0, 1e-3)

    @pytest.mark.parametrize("variant", [PprGoVariant.SUM, PprGoVariant.WEIGHTED_SUM])
    def test_pprgo(self, service, tiny_sbm, variant):
        table = graph_ppr_table(tiny_sbm, 4, 0.25)
        result = service.fit_pprgo(
            tiny_sbm.attributes, tiny_sbm.labels, table, variant, tiny_sbm.train_mask, tiny_sbm.test_mask
        )
        assert 0.0 <= result.test_accuracy <= 1.0
        assert set(result.accuracy_by_decay) == {0.0, 1e-3}

    def test_without_test_set(self, service, separable):
        features, labels, train, _ = separable
        result = service.fit_linear_on_pca(features, labels, train)
        assert result.test_accuracy is None
        assert result.train_accuracy == 1.0
