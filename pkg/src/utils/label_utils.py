# /src/utils/label_utils.py

"""
Label Utilities Module

This module provides the label-level operations every metric builds on: class
remapping, instance segment extraction and the minimum-point instance filter.
"""

import logging
from typing import Iterable, List, Optional

import numpy as np

from constant import DEFAULT_MIN_POINTS, PANOPTIC_DIVISOR
from models.exceptions import UnknownRawClassError
from models.label_models import ClassMap, ScanLabels, Segment

logger = logging.getLogger(__name__)


def remap(scan: ScanLabels, class_map: ClassMap, source: Optional[str] = None) -> ScanLabels:
    """
    Replace raw class ids by evaluation ids.

    Instances of stuff and ignored classes are zeroed.

    Args:
        scan: Labels in raw class ids
        class_map: Raw-to-eval mapping
        source: Optional token or path used in error messages

    Returns:
        Labels in evaluation ids with the same point count

    Raises:
        UnknownRawClassError: If a raw id is absent from the map
    """
    lookup = class_map.lookup
    raw = scan.semantic
    outside = (raw < 0) | (raw >= lookup.shape[0])
    if outside.any():
        raise UnknownRawClassError(int(raw[outside][0]), source)
    semantic = lookup[raw]
    unknown = semantic < 0
    if unknown.any():
        raise UnknownRawClassError(int(raw[unknown][0]), source)

    instance = np.where(class_map.thing_mask(semantic), scan.instance, 0)
    return ScanLabels(semantic=semantic, instance=instance)


def segment_keys(scan: ScanLabels, class_map: ClassMap) -> np.ndarray:
    """
    Per-point packed (class, instance) key of thing instances, -1 elsewhere.

    Args:
        scan: Labels in evaluation ids
        class_map: Class map providing the thing classes

    Returns:
        int64 array of keys class_id * 1000 + instance_id
    """
    is_instance = class_map.thing_mask(scan.semantic) & (scan.instance > 0)
    return np.where(
        is_instance, scan.semantic * PANOPTIC_DIVISOR + scan.instance, -1
    )


def extract_segments(scan: ScanLabels, class_map: ClassMap) -> List[Segment]:
    """
    Group thing points into one segment per (class, instance) pair.

    Args:
        scan: Labels in evaluation ids
        class_map: Class map providing the thing classes

    Returns:
        Segments ordered by (class_id, instance_id)
    """
    keys = segment_keys(scan, class_map)
    points = np.flatnonzero(keys >= 0)
    if points.size == 0:
        return []

    order = np.argsort(keys[points], kind="stable")
    sorted_points = points[order]
    unique_keys, starts = np.unique(keys[sorted_points], return_index=True)
    bounds = list(starts[1:]) + [sorted_points.size]

    segments = []
    for key, start, end in zip(unique_keys, starts, bounds):
        segments.append(
            Segment(
                class_id=int(key // PANOPTIC_DIVISOR),
                instance_id=int(key % PANOPTIC_DIVISOR),
                point_indices=sorted_points[start:end],
            )
        )
    return segments


def filter_min_points(
    segments: Iterable[Segment], threshold: int = DEFAULT_MIN_POINTS
) -> List[Segment]:
    """
    Keep segments with strictly more points than the threshold.

    Args:
        segments: Candidate segments
        threshold: Minimum point count, exclusive

    Returns:
        The retained segments in input order
    """
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    return [segment for segment in segments if segment.size > threshold]


def small_instance_mask(
    scan: ScanLabels, class_map: ClassMap, threshold: int
) -> np.ndarray:
    """
    Per-point mask of thing points whose instance has at most `threshold` points.

    Args:
        scan: Labels in evaluation ids
        class_map: Class map providing the thing classes
        threshold: Minimum point count, exclusive

    Returns:
        Boolean mask of points belonging to removed instances
    """
    keys = segment_keys(scan, class_map)
    valid = keys >= 0
    mask = np.zeros(scan.point_count, dtype=bool)
    if threshold <= 0 or not valid.any():
        return mask
    unique_keys, inverse, counts = np.unique(
        keys[valid], return_inverse=True, return_counts=True
    )
    mask[valid] = counts[inverse] <= threshold
    return mask


def instance_void_mask(
    scan: ScanLabels, class_map: ClassMap, threshold: Optional[int]
) -> np.ndarray:
    """
    Points excluded from instance-level matching on the ground-truth side.

    Void covers ignored points, thing points without an instance and, when a
    threshold is given, the points of instances removed by the point filter.
    Their semantic labels still count for semantic metrics.

    Args:
        scan: Ground-truth labels in evaluation ids
        class_map: Class map
        threshold: Minimum point count, or None to disable the filter

    Returns:
        Boolean mask of void points
    """
    void = scan.semantic == class_map.ignore_id
    void |= class_map.thing_mask(scan.semantic) & (scan.instance == 0)
    if threshold is not None:
        void |= small_instance_mask(scan, class_map, threshold)
    return void
