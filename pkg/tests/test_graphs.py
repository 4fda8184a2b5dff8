"""
Тесты графов: структура, нормировка, PageRank, SBM, разбиения, скелет.
"""

import numpy as np
import pytest
import scipy.sparse as sp

from app.core.exceptions import DomainException, ShapeException
from app.graphs import (
    BONES,
    N_JOINTS,
    Graph,
    PprTable,
    generate_sbm,
    graph_from_edges,
    graph_ppr_table,
    make_inductive,
    normalized_adjacency,
    ppr_exact,
    ppr_topk,
    random_split,
    skeleton_adjacency,
    skeleton_neighbors,
    topk_neighbors,
)


def _ring(n: int) -> Graph:
    return graph_from_edges(n, [(i, (i + 1) % n) for i in range(n)], np.zeros((n, 1)))


class TestGraph:
    def test_edges_are_symmetrized(self):
        graph = graph_from_edges(3, [(0, 1), (1, 2), (1, 0), (2, 2)], np.zeros((3, 2)))
        assert graph.n_edges == 2
        assert graph.adjacency[1, 0] == 1.0
        assert graph.adjacency.diagonal().sum() == 0

    def test_asymmetric_adjacency(self):
        adjacency = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(DomainException):
            Graph(adjacency=adjacency, attributes=np.zeros((2, 1)))

    def test_weighted_adjacency(self):
        adjacency = sp.csr_matrix(np.array([[0.0, 2.0], [2.0, 0.0]]))
        with pytest.raises(DomainException):
            Graph(adjacency=adjacency, attributes=np.zeros((2, 1)))

    def test_attribute_rows(self):
        with pytest.raises(ShapeException):
            graph_from_edges(3, [(0, 1)], np.zeros((2, 4)))

    def test_overlapping_masks(self):
        with pytest.raises(DomainException):
            graph_from_edges(
                2, [(0, 1)], np.zeros((2, 1)),
                train_mask=np.array([True, False]), test_mask=np.array([True, True]),
            )

    def test_n_classes_ignores_unlabeled(self):
        graph = graph_from_edges(3, [(0, 1)], np.zeros((3, 1)), labels=np.array([0, -1, 2]))
        assert graph.n_classes == 3


class TestPageRank:
    def test_two_node_graph(self, two_node_graph):
        a_norm = normalized_adjacency(two_node_graph).toarray()
        np.testing.assert_allclose(a_norm, np.full((2, 2), 0.5))
        pi = ppr_exact(a_norm, 0.25)
        np.testing.assert_allclose(pi, [[0.625, 0.375], [0.375, 0.625]], atol=1e-12)

    def test_isolated_node_keeps_self_loop(self):
        graph = graph_from_edges(3, [(0, 1)], np.zeros((3, 1)))
        a_norm = normalized_adjacency(graph).toarray()
        assert a_norm[2, 2] == 1.0
        pi = ppr_exact(a_norm, 0.25)
        assert pi[2, 2] == pytest.approx(1.0)

    def test_matches_power_iteration(self, tiny_sbm):
        a_norm = normalized_adjacency(tiny_sbm).toarray()
        alpha = 0.15
        iterate = alpha * np.eye(tiny_sbm.n_nodes)
        for _ in range(400):
            iterate = alpha * np.eye(tiny_sbm.n_nodes) + (1 - alpha) * a_norm @ iterate
        assert np.abs(ppr_exact(a_norm, alpha) - iterate).max() <= 1e-8

    def test_rows_sum_to_one_for_regular_graph(self):
        pi = ppr_exact(normalized_adjacency(_ring(6)), 0.3)
        np.testing.assert_allclose(pi.sum(axis=1), np.ones(6), atol=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, -0.1, 1.5])
    def test_alpha_domain(self, two_node_graph, alpha):
        with pytest.raises(DomainException):
            ppr_exact(normalized_adjacency(two_node_graph), alpha)

    @pytest.mark.parametrize("block_size", [1, 7, 2048])
    def test_blockwise_topk_matches_exact(self, tiny_sbm, block_size):
        a_norm = normalized_adjacency(tiny_sbm)
        pi = ppr_exact(a_norm, 0.25)
        table = ppr_topk(a_norm, 0.25, 5, block_size=block_size)
        reference = topk_neighbors(pi, 5)
        np.testing.assert_allclose(table.scores, reference.scores, atol=1e-12)
        rows = np.arange(tiny_sbm.n_nodes)[:, None]
        np.testing.assert_allclose(pi[rows, table.indices], table.scores, atol=1e-12)

    def test_ties_go_to_lower_index(self):
        pi = np.array([[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]])
        table = topk_neighbors(pi, 2)
        assert table.indices.tolist() == [[0, 1], [1, 0], [2, 0]]

    def test_k_clamped_to_graph_size(self, two_node_graph):
        assert graph_ppr_table(two_node_graph, 8, 0.25).k == 2

    def test_k_domain(self, two_node_graph):
        with pytest.raises(DomainException):
            topk_neighbors(np.eye(2), 3)

    def test_table_scores_must_not_increase(self):
        with pytest.raises(DomainException):
            PprTable.from_arrays(np.array([[0, 1]]), np.array([[0.1, 0.5]]))


class TestSbm:
    def test_shape_and_labels(self):
        graph = generate_sbm(30, 3, 0.5, 0.02, seed=0)
        assert graph.n_nodes == 30
        assert graph.n_attrs == 3
        assert np.bincount(graph.labels).tolist() == [10, 10, 10]
        assert graph.attributes.min() >= 0.0 and graph.attributes.max() <= 1.0

    def test_seed_is_reproducible(self):
        first = generate_sbm(30, 3, 0.5, 0.02, seed=4)
        second = generate_sbm(30, 3, 0.5, 0.02, seed=4)
        assert (first.adjacency != second.adjacency).nnz == 0
        np.testing.assert_array_equal(first.attributes, second.attributes)

    def test_communities_are_denser_inside(self):
        graph = generate_sbm(90, 3, 0.4, 0.01, seed=1)
        rows, cols = graph.adjacency.nonzero()
        inside = np.mean(graph.labels[rows] == graph.labels[cols])
        assert inside > 0.8

    def test_invalid_probabilities(self):
        with pytest.raises(DomainException):
            generate_sbm(30, 3, 0.01, 0.2, seed=0)

    def test_uneven_communities(self):
        with pytest.raises(DomainException):
            generate_sbm(31, 3, 0.5, 0.02, seed=0)


class TestSplits:
    def test_labels_per_class(self, tiny_sbm):
        train, test = random_split(tiny_sbm.labels, seed=3, labels_per_class=2)
        assert np.bincount(tiny_sbm.labels[train]).tolist() == [2, 2, 2]
        assert test.sum() == 24
        assert not np.any(train & test)

    def test_fixed_test_size(self, tiny_sbm):
        train, test = random_split(tiny_sbm.labels, seed=3, n_test=10)
        assert test.sum() == 10
        assert train.sum() == 20

    def test_split_is_seeded(self, tiny_sbm):
        first = random_split(tiny_sbm.labels, seed=5, n_test=10)
        second = random_split(tiny_sbm.labels, seed=5, n_test=10)
        assert np.array_equal(first[1], second[1])

    def test_not_enough_labels(self, tiny_sbm):
        with pytest.raises(DomainException):
            random_split(tiny_sbm.labels, seed=0, labels_per_class=11)

    def test_inductive_removes_test_nodes(self, tiny_sbm):
        test_ids = np.flatnonzero(tiny_sbm.test_mask)
        train_graph, full = make_inductive(tiny_sbm, test_ids)
        assert full is tiny_sbm
        assert train_graph.n_nodes == tiny_sbm.n_nodes - test_ids.size
        assert not np.isin(train_graph.node_ids, test_ids).any()
        assert train_graph.train_mask.sum() == tiny_sbm.train_mask.sum()

    def test_inductive_unknown_node(self, tiny_sbm):
        with pytest.raises(DomainException):
            make_inductive(tiny_sbm, [100])


class TestSkeleton:
    def test_bones(self):
        adjacency = skeleton_adjacency()
        assert len(BONES) == 19
        assert adjacency.shape == (N_JOINTS, N_JOINTS)
        assert np.array_equal(adjacency, adjacency.T)
        # дерево: связное и без циклов
        assert adjacency.sum() / 2 == N_JOINTS - 1

    def test_neighbors_include_self(self):
        table = skeleton_neighbors()
        assert table.neighbors(2).tolist() == [1, 2, 3, 4, 8]
        assert table.neighbors(3).tolist() == [2, 3]
        assert table.counts().min() == 2
