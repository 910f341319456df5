# /src/fusion/box_geometry.py

"""
Box Geometry Module

Point-in-oriented-box tests for 7-DoF boxes rotated about +z.
"""

import numpy as np

from models.box_models import Box3D

# Slack on the face test so points on a face survive the rotation round-off
FACE_TOLERANCE = 1e-9


def box_rotation(yaw: float) -> np.ndarray:
    """Rotation matrix of a heading `yaw` around +z (box-local to world)."""
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def points_in_box(points: np.ndarray, box: Box3D, tolerance: float = FACE_TOLERANCE) -> np.ndarray:
    """
    Indices of the points inside an oriented box, faces included.

    Points are moved into the box frame (translated by -center, rotated by -yaw)
    and compared with the half extents on every axis.

    Args:
        points: Array of shape (N, >=3); only x, y, z are used
        box: Oriented box
        tolerance: Absolute slack on the face test

    Returns:
        Sorted int64 indices of the contained points
    """
    xyz = np.asarray(points, dtype=np.float64)[:, :3]
    local = (xyz - np.asarray(box.center)) @ box_rotation(box.yaw)
    half = np.asarray(box.size) / 2.0 + tolerance
    inside = np.all(np.abs(local) <= half, axis=1)
    return np.flatnonzero(inside)
