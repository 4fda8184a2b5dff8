"""
Графы: структуры данных, SBM, PageRank, разбиения, скелет.
"""

from .graph import Graph, NeighborTable, PprTable, graph_from_edges
from .ppr import graph_ppr_table, normalized_adjacency, ppr_exact, ppr_topk, topk_neighbors
from .sbm import default_attr_means, generate_sbm
from .skeleton import BONES, JOINT_NAMES, N_JOINTS, skeleton_adjacency, skeleton_neighbors
from .splits import make_inductive, random_split

__all__ = [
    "Graph",
    "NeighborTable",
    "PprTable",
    "graph_from_edges",
    "graph_ppr_table",
    "normalized_adjacency",
    "ppr_exact",
    "ppr_topk",
    "topk_neighbors",
    "default_attr_means",
    "generate_sbm",
    "BONES",
    "JOINT_NAMES",
    "N_JOINTS",
    "skeleton_adjacency",
    "skeleton_neighbors",
    "make_inductive",
    "random_split",
]
