"""
Тесты ввода-вывода: bundle графа, PCA, чекпоинты, скелеты, CSV признаков.
"""

import math

import numpy as np
import pytest
import torch

from app.core.exceptions import (
    ConfigurationException,
    DomainException,
    FormatException,
    HashMismatchException,
    NodeIdException,
    ShapeException,
    VersionException,
)
from app.dataio import (
    ACTIONS,
    fit_feature_transform,
    generate_synthetic_skeletons,
    kfold_by_subject,
    load_checkpoint,
    load_graph_bundle,
    load_skeleton_dataset,
    normalize_skeletons,
    pca_reduce,
    prepare_features,
    read_features,
    save_checkpoint,
    save_graph_bundle,
    save_skeleton_bundle,
    write_features,
)
from app.dgnn import forward_dgnn_e, perturb_coefficients, quantize_model
from app.graphs import graph_ppr_table


def _write_bundle(root, meta=None, edges="0\t1\n1\t2\n", features="0.1,0.2\n0.3,0.4\n0.5,0.6\n", labels="0\n1\n-1\n"):
    root.mkdir(parents=True, exist_ok=True)
    meta = meta or "version=1\nn_nodes=3\nn_attrs=2\nn_classes=2\nn_edges=2\n"
    (root / "meta.txt").write_text(meta, encoding="utf-8")
    (root / "edges.tsv").write_text(edges, encoding="utf-8")
    (root / "features.csv").write_text(features, encoding="utf-8")
    (root / "labels.txt").write_text(labels, encoding="utf-8")
    return root


class TestGraphBundle:
    def test_round_trip(self, tmp_path, tiny_sbm):
        save_graph_bundle(tiny_sbm, tmp_path / "sbm", class_names=["a", "b", "c"])
        loaded = load_graph_bundle(tmp_path / "sbm")
        assert (loaded.adjacency != tiny_sbm.adjacency).nnz == 0
        np.testing.assert_array_equal(loaded.attributes, tiny_sbm.attributes)
        np.testing.assert_array_equal(loaded.labels, tiny_sbm.labels)
        np.testing.assert_array_equal(loaded.train_mask, tiny_sbm.train_mask)
        np.testing.assert_array_equal(loaded.test_mask, tiny_sbm.test_mask)
        assert loaded.class_names == ["a", "b", "c"]

    def test_minimal_bundle(self, tmp_path):
        graph = load_graph_bundle(_write_bundle(tmp_path / "g"))
        assert graph.n_edges == 2
        assert graph.labels.tolist() == [0, 1, -1]
        assert not graph.train_mask.any() and not graph.test_mask.any()
        assert graph.class_names == ["0", "1"]

    def test_node_out_of_range(self, tmp_path):
        with pytest.raises(NodeIdException) as error:
            load_graph_bundle(_write_bundle(tmp_path / "g", edges="0\t1\n1\t3\n"))
        assert error.value.line == 2

    def test_unsupported_version(self, tmp_path):
        with pytest.raises(VersionException):
            load_graph_bundle(_write_bundle(tmp_path / "g", meta="version=2\nn_nodes=3\nn_attrs=2\nn_classes=2\n"))

    def test_edge_count_mismatch(self, tmp_path):
        meta = "version=1\nn_nodes=3\nn_attrs=2\nn_classes=2\nn_edges=5\n"
        with pytest.raises(FormatException):
            load_graph_bundle(_write_bundle(tmp_path / "g", meta=meta))

    def test_feature_columns(self, tmp_path):
        with pytest.raises(FormatException) as error:
            load_graph_bundle(_write_bundle(tmp_path / "g", features="0.1,0.2\n0.3\n0.5,0.6\n"))
        assert error.value.line == 2

    def test_label_range(self, tmp_path):
        with pytest.raises(FormatException):
            load_graph_bundle(_write_bundle(tmp_path / "g", labels="0\n2\n1\n"))

    def test_missing_file(self, tmp_path):
        root = _write_bundle(tmp_path / "g")
        (root / "labels.txt").unlink()
        with pytest.raises(FormatException):
            load_graph_bundle(root)

    def test_split_conflict(self, tmp_path):
        root = _write_bundle(tmp_path / "g")
        (root / "split.txt").write_text("0 train\n0 test\n", encoding="utf-8")
        with pytest.raises(FormatException):
            load_graph_bundle(root)


class TestPca:
    def test_reduce_to_unit_range(self):
        features = np.random.default_rng(0).normal(size=(50, 10))
        reduced, transform = pca_reduce(features, 3)
        assert reduced.shape == (50, 3)
        np.testing.assert_allclose(reduced.min(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(reduced.max(axis=0), 1.0, atol=1e-12)
        ratios = transform.explained_variance_ratio
        assert np.all(np.diff(ratios) <= 0)

    def test_phase_range(self):
        features = np.random.default_rng(1).normal(size=(40, 6))
        reduced, _ = pca_reduce(features, 2, target_range="two_pi")
        assert reduced.max() == pytest.approx(2 * math.pi)

    def test_dim_too_large(self):
        with pytest.raises(DomainException):
            pca_reduce(np.zeros((5, 3)), 4)

    def test_fit_rows_clip_unseen_values(self):
        features = np.random.default_rng(2).normal(size=(60, 8))
        reduced, _ = pca_reduce(features, 3, fit_rows=np.arange(20))
        assert reduced.min() >= 0.0 and reduced.max() <= 1.0

    def test_prepare_without_reduction(self):
        features = np.array([[0.0, 10.0], [5.0, 20.0], [10.0, 30.0]])
        prepared = prepare_features(features, dim=20)
        np.testing.assert_allclose(prepared, [[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]])

    def test_prepare_with_reduction(self):
        features = np.random.default_rng(3).normal(size=(30, 25))
        assert prepare_features(features, dim=20).shape == (30, 20)

    def test_transform_fitted_on_rows_applies_to_all(self):
        features = np.random.default_rng(4).normal(size=(40, 12))
        transform = fit_feature_transform(features, 4, fit_rows=np.arange(25))
        assert transform.fit_mode == "fit_rows"
        np.testing.assert_array_equal(
            transform.transform(features), prepare_features(features, 4, fit_rows=np.arange(25))
        )
        # масштаб не зависит от узлов вне fit_rows
        shifted = features.copy()
        shifted[30:] *= 10.0
        refit = fit_feature_transform(shifted, 4, fit_rows=np.arange(25))
        np.testing.assert_array_equal(refit.transform(features[:25]), transform.transform(features[:25]))

    def test_transform_wrong_width(self):
        transform = fit_feature_transform(np.random.default_rng(5).normal(size=(10, 3)), 20)
        assert transform.components is None
        with pytest.raises(ShapeException):
            transform.transform(np.zeros((4, 5)))


class TestCheckpoint:
    def _outputs(self, graph, model):
        return forward_dgnn_e(graph, graph_ppr_table(graph, 4, 0.25), model).detach()

    def test_round_trip_is_exact(self, tmp_path, tiny_sbm, small_model):
        digest = save_checkpoint(small_model, tmp_path / "model.ckpt", {"epochs": 3})
        checkpoint = load_checkpoint(tmp_path / "model.ckpt")
        assert checkpoint.content_hash == digest
        assert checkpoint.train_config == {"epochs": 3}
        assert checkpoint.model.optics_hash() == small_model.optics_hash()
        assert torch.equal(checkpoint.model.classifier.weight, small_model.classifier.weight)
        assert torch.equal(self._outputs(tiny_sbm, checkpoint.model), self._outputs(tiny_sbm, small_model))

    def test_feature_transform_and_split(self, tmp_path, small_model):
        attributes = np.random.default_rng(6).normal(size=(30, 25))
        transform = fit_feature_transform(attributes, 3, target_range="two_pi", fit_rows=np.arange(20))
        test_mask = np.arange(30) >= 20
        save_checkpoint(small_model, tmp_path / "model.ckpt", feature_transform=transform, test_mask=test_mask)

        checkpoint = load_checkpoint(tmp_path / "model.ckpt")
        assert checkpoint.feature_transform.fit_mode == "fit_rows"
        np.testing.assert_array_equal(checkpoint.encode_attributes(attributes), transform.transform(attributes))
        np.testing.assert_array_equal(checkpoint.test_mask(30), test_mask)
        with pytest.raises(ConfigurationException):
            checkpoint.test_mask(31)

    def test_without_transform_or_split(self, tmp_path, small_model):
        save_checkpoint(small_model, tmp_path / "model.ckpt")
        checkpoint = load_checkpoint(tmp_path / "model.ckpt")
        assert checkpoint.feature_transform is None
        assert checkpoint.test_mask(30) is None

    def test_binary_and_noisy(self, tmp_path, tiny_sbm, small_model):
        model = perturb_coefficients(quantize_model(small_model), 0.1, seed=2)
        save_checkpoint(model, tmp_path / "model.ckpt")
        loaded = load_checkpoint(tmp_path / "model.ckpt").model
        assert loaded.binary
        assert set(loaded.noise) == set(model.noise)
        assert loaded.optics_hash() == model.optics_hash()
        assert torch.equal(self._outputs(tiny_sbm, loaded), self._outputs(tiny_sbm, model))

    def test_optical_classifier(self, tmp_path, small_optical_model):
        save_checkpoint(small_optical_model, tmp_path / "model.ckpt")
        loaded = load_checkpoint(tmp_path / "model.ckpt").model
        assert torch.equal(loaded.classifier_widths, small_optical_model.classifier_widths)
        assert loaded.classifier_geometry == small_optical_model.classifier_geometry

    def test_action_model(self, tmp_path, small_action_model):
        save_checkpoint(small_action_model, tmp_path / "model.ckpt")
        loaded = load_checkpoint(tmp_path / "model.ckpt").model
        assert loaded.has_readout
        assert loaded.classifier.weight.shape == (48, 6)

    def test_tampered_body(self, tmp_path, small_model):
        path = tmp_path / "model.ckpt"
        save_checkpoint(small_model, path)
        text = path.read_text(encoding="utf-8")
        path.write_text(text.replace('"n_heads": 2', '"n_heads": 3'), encoding="utf-8")
        with pytest.raises(HashMismatchException):
            load_checkpoint(path)

    def test_unknown_version(self, tmp_path, small_model):
        path = tmp_path / "model.ckpt"
        save_checkpoint(small_model, path)
        text = path.read_text(encoding="utf-8")
        path.write_text(text.replace("dgnn-ckpt v1", "dgnn-ckpt v2", 1), encoding="utf-8")
        with pytest.raises(VersionException):
            load_checkpoint(path)

    def test_missing_hash(self, tmp_path, small_model):
        path = tmp_path / "model.ckpt"
        save_checkpoint(small_model, path)
        lines = path.read_text(encoding="utf-8").split("\n")
        path.write_text("\n".join(lines[:2]) + "\n", encoding="utf-8")
        with pytest.raises(FormatException):
            load_checkpoint(path)


class TestSkeletons:
    def test_synthetic(self):
        sequences = generate_synthetic_skeletons(per_class=2, frames=10, seed=0)
        assert len(sequences) == 12
        assert sequences[0].frames.shape == (10, 20, 3)
        assert sorted({s.action for s in sequences}) == list(range(6))

    def test_bundle_round_trip(self, tmp_path):
        sequences = generate_synthetic_skeletons(per_class=2, frames=5, seed=1)
        save_skeleton_bundle(sequences, tmp_path / "skeletons.txt")
        loaded = load_skeleton_dataset(tmp_path / "skeletons.txt")
        assert len(loaded) == len(sequences)
        originals = {(s.subject, s.repetition, s.action): s for s in sequences}
        for sequence in loaded:
            np.testing.assert_array_equal(
                sequence.frames, originals[(sequence.subject, sequence.repetition, sequence.action)].frames
            )

    def test_bundle_header(self, tmp_path):
        path = tmp_path / "skeletons.txt"
        path.write_text("1 1 walk 0\n", encoding="utf-8")
        with pytest.raises(FormatException):
            load_skeleton_dataset(path)

    def test_utkinect_directory(self, tmp_path):
        (tmp_path / "joints").mkdir()
        (tmp_path / "actionLabel.txt").write_text(
            "s01_e02\nwalk: 1 3\nsitDown: 4 5\ncarry: NaN NaN\n", encoding="utf-8"
        )
        rows = [" ".join([str(frame)] + [f"{0.01 * (frame + j):.2f}" for j in range(60)]) for frame in range(1, 7)]
        (tmp_path / "joints" / "joints_s01_e02.txt").write_text("\n".join(rows) + "\n", encoding="utf-8")

        sequences = load_skeleton_dataset(tmp_path)
        assert [ACTIONS[s.action] for s in sequences] == ["walk", "sitDown"]
        assert [s.n_frames for s in sequences] == [3, 2]
        assert sequences[0].group == (1, 2)
        assert sequences[1].frames[0, 0, 0] == pytest.approx(0.04)

    def test_joint_file_width(self, tmp_path):
        (tmp_path / "actionLabel.txt").write_text("s01_e01\nwalk: 1 1\n", encoding="utf-8")
        (tmp_path / "joints_s01_e01.txt").write_text("1 0.1 0.2\n", encoding="utf-8")
        with pytest.raises(FormatException):
            load_skeleton_dataset(tmp_path)

    def test_kfold_by_group(self):
        sequences = generate_synthetic_skeletons(per_class=5, frames=4, seed=0)
        folds = kfold_by_subject(sequences, folds=5, seed=0)
        assert len(folds) == 5
        tested = np.concatenate([test for _, test in folds])
        assert sorted(tested.tolist()) == list(range(len(sequences)))
        for train, test in folds:
            assert not {sequences[i].group for i in train} & {sequences[i].group for i in test}

    def test_kfold_uneven(self):
        sequences = generate_synthetic_skeletons(per_class=5, frames=4, seed=0)
        with pytest.raises(DomainException):
            kfold_by_subject(sequences, folds=3)

    def test_normalize(self):
        sequences = generate_synthetic_skeletons(per_class=2, frames=6, seed=0)
        normalized, _ = normalize_skeletons(sequences, fit_indices=[0, 1, 2])
        stacked = np.concatenate([s.frames.reshape(-1, 3) for s in normalized])
        assert stacked.min() >= 0.0 and stacked.max() <= 1.0
        fitted = np.concatenate([s.frames.reshape(-1, 3) for s in normalized[:3]])
        np.testing.assert_allclose(fitted.min(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(fitted.max(axis=0), 1.0, atol=1e-12)


class TestFeaturesCsv:
    def test_rewrite_is_byte_identical(self, tmp_path):
        matrix = np.random.default_rng(0).uniform(size=(6, 4))
        labels = np.array([0, 1, 2, 0, 1, -1])
        first = write_features(matrix, labels, tmp_path / "a.csv")
        loaded, loaded_labels = read_features(first)
        np.testing.assert_array_equal(loaded, matrix)
        np.testing.assert_array_equal(loaded_labels, labels)
        second = write_features(loaded, loaded_labels, tmp_path / "b.csv")
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text(encoding="utf-8").splitlines()[0] == "f0,f1,f2,f3,label"
