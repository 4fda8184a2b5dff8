"""
DGNN: оптические MSG/AGG, read-out, классификаторы, квантование и шум.
"""

from .action import forward_action, subsequence_features, subsequence_pipeline, subsequence_windows
from .encoding import encode_attributes
from .forward import (
    NodeFeatures,
    agg_node,
    aggregate_all,
    classify_features,
    detect,
    forward_dgnn_e,
    forward_dgnn_o,
    forward_nodes,
    messages,
    msg_all,
    node_features,
    predict,
    readout_graph,
)
from .model import DgnnModel, ElectronicFc, build_model, quantize_widths
from .quantize import perturb_coefficients, quantize_binary, quantize_model

__all__ = [
    "forward_action",
    "subsequence_features",
    "subsequence_pipeline",
    "subsequence_windows",
    "encode_attributes",
    "NodeFeatures",
    "agg_node",
    "aggregate_all",
    "classify_features",
    "detect",
    "forward_dgnn_e",
    "forward_dgnn_o",
    "forward_nodes",
    "messages",
    "msg_all",
    "node_features",
    "predict",
    "readout_graph",
    "DgnnModel",
    "ElectronicFc",
    "build_model",
    "quantize_widths",
    "perturb_coefficients",
    "quantize_binary",
    "quantize_model",
]
