"""
Граф скелета Kinect V1 (20 суставов).
"""

import numpy as np

from app.graphs.graph import NeighborTable

N_JOINTS = 20

JOINT_NAMES = [
    "hip_center", "spine", "shoulder_center", "head",
    "shoulder_left", "elbow_left", "wrist_left", "hand_left",
    "shoulder_right", "elbow_right", "wrist_right", "hand_right",
    "hip_left", "knee_left", "ankle_left", "foot_left",
    "hip_right", "knee_right", "ankle_right", "foot_right",
]

BONES = [
    (0, 1), (1, 2), (2, 3),
    (2, 4), (4, 5), (5, 6), (6, 7),
    (2, 8), (8, 9), (9, 10), (10, 11),
    (0, 12), (12, 13), (13, 14), (14, 15),
    (0, 16), (16, 17), (17, 18), (18, 19),
]


def skeleton_adjacency() -> np.ndarray:
    """Бинарная смежность костей (20, 20) без петель."""
    adjacency = np.zeros((N_JOINTS, N_JOINTS), dtype=np.float64)
    for a, b in BONES:
        adjacency[a, b] = adjacency[b, a] = 1.0
    return adjacency


def skeleton_neighbors() -> NeighborTable:
    """Прямые соседи каждого сустава вместе с ним самим, по возрастанию индекса."""
    with_loops = skeleton_adjacency() + np.eye(N_JOINTS)
    rows = [np.flatnonzero(row) for row in with_loops]
    width = max(len(r) for r in rows)
    indices = np.zeros((N_JOINTS, width), dtype=np.int64)
    mask = np.zeros((N_JOINTS, width), dtype=bool)
    for joint, row in enumerate(rows):
        indices[joint, :len(row)] = row
        mask[joint, :len(row)] = True
    return NeighborTable(indices=indices, mask=mask)
