"""
Ввод-вывод: графы, PCA, скелеты, чекпоинты, отчеты.
"""

from .bundle import load_graph_bundle, save_graph_bundle, write_split
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .files import atomic_write_text
from .pca import FeatureTransform, fit_feature_transform, pca_reduce, prepare_features, target_range_for
from .reports import (
    read_features,
    write_confusion,
    write_features,
    write_history,
    write_metrics,
    write_sweep,
    write_table,
)
from .skeleton import (
    ACTIONS,
    SkeletonSequence,
    generate_synthetic_skeletons,
    kfold_by_subject,
    load_skeleton_dataset,
    normalize_skeletons,
    save_skeleton_bundle,
)

__all__ = [
    "load_graph_bundle",
    "save_graph_bundle",
    "write_split",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "atomic_write_text",
    "FeatureTransform",
    "fit_feature_transform",
    "pca_reduce",
    "prepare_features",
    "target_range_for",
    "read_features",
    "write_confusion",
    "write_features",
    "write_history",
    "write_metrics",
    "write_sweep",
    "write_table",
    "ACTIONS",
    "SkeletonSequence",
    "generate_synthetic_skeletons",
    "kfold_by_subject",
    "load_skeleton_dataset",
    "normalize_skeletons",
    "save_skeleton_bundle",
]
