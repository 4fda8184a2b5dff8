"""
Общие фикстуры тестов.
"""

import numpy as np
import pytest

from app.core.database import close_database, get_db_session, init_database
from app.dgnn import build_model
from app.graphs import generate_sbm, graph_from_edges, random_split
from app.photonics import default_lut
from app.schemas.experiment import ClassifierKind, TaskKind
from app.schemas.geometry import DpuGeometry, GeometryPreset
from tests.helpers import small_spec


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="запускать долгие тесты")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="нужен флаг --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_geometry() -> DpuGeometry:
    return DpuGeometry(n_in=3, n_out=2, layer_distance=5e-6, num_layers=2, atoms_per_line=12, oversample=2)


@pytest.fixture
def lut():
    return default_lut()


@pytest.fixture
def two_node_graph():
    return graph_from_edges(
        2,
        [(0, 1)],
        np.array([[0.5, 0.2, 0.1], [0.1, 0.9, 0.3]]),
        labels=np.array([0, 1]),
        train_mask=np.array([True, False]),
        test_mask=np.array([False, True]),
    )


@pytest.fixture
def tiny_sbm():
    graph = generate_sbm(30, 3, 0.5, 0.02, seed=0)
    return graph.with_split(*random_split(graph.labels, seed=0, labels_per_class=2))


@pytest.fixture
def small_model(lut):
    return build_model(small_spec(), n_attrs=3, n_classes=3, lut=lut, seed=0)


@pytest.fixture
def small_optical_model(lut):
    return build_model(small_spec(classifier=ClassifierKind.OPTICAL), n_attrs=3, n_classes=3, lut=lut, seed=0)


@pytest.fixture
def small_action_model(lut):
    spec = small_spec(heads=4, frames=6, preset=GeometryPreset.ACTION)
    return build_model(spec, n_attrs=3, n_classes=6, lut=lut, seed=0, task=TaskKind.GRAPH_ACTION)


@pytest.fixture
def registry_session():
    init_database("sqlite://")
    with get_db_session() as session:
        yield session
    close_database()
