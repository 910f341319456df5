# /src/fusion/__init__.py

"""
Fusion package.

Builds panoptic labels from semantic labels and 3D boxes, for ground truth and
for detection-based baselines.
"""

from .box_geometry import points_in_box, box_rotation
from .panoptic_fusion import (
    TrackIdRegistry,
    fuse_gt,
    fuse_pred,
    select_boxes,
    select_max_f1_thresholds,
    overlap_noise_statistics,
)
