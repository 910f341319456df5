# /src/fusion/panoptic_fusion.py

"""
Panoptic Fusion Module

This module turns per-point semantic labels plus 3D boxes into panoptic labels.

Ground-truth fusion gives every point that falls in a box of its own class the
box's track-derived instance id; points claimed by two or more such boxes are
labelled noise (ignore class, no instance).

Prediction fusion follows the combination baseline: every point inside a
detection box takes the box's class and instance id. Overlaps go to the box
with the highest score, then the larger volume, then the earlier input.
"""

import logging
from typing import Dict, Hashable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
import pandas as pd

from constant import DEFAULT_MAX_F1_DISTANCE, MAX_INSTANCE_ID
from fusion.box_geometry import points_in_box
from models.box_models import Box3D
from models.config_models import FusionConfig
from models.exceptions import InstanceRangeError, LengthMismatchError
from models.label_models import ClassMap, ScanLabels

logger = logging.getLogger(__name__)

TrackKey = Union[int, str]


class TrackIdRegistry:
    """
    Per-sequence mapping from box track ids to instance ids 1..999.

    Ids are handed out in first-seen order. Ids given to untracked boxes are
    remembered for the whole sequence, so tracked and untracked boxes never
    share an instance id in any two scans.
    """

    def __init__(self):
        self._ids: Dict[Hashable, int] = {}
        self._untracked: Set[int] = set()

    def _lowest_free(self, taken: Set[int]) -> Optional[int]:
        candidate = 1
        while candidate in taken:
            candidate += 1
        return candidate if candidate <= MAX_INSTANCE_ID else None

    def register(self, track_id: TrackKey) -> int:
        """
        Return the instance id of a track, allocating one on first sight.

        Raises:
            InstanceRangeError: If the sequence has more than 999 tracks
        """
        if track_id not in self._ids:
            next_id = self._lowest_free(self.assigned | self._untracked)
            if next_id is None:
                raise InstanceRangeError(
                    f"More than {MAX_INSTANCE_ID} tracks in one sequence; "
                    f"track '{track_id}' does not fit the label encoding"
                )
            self._ids[track_id] = next_id
        return self._ids[track_id]

    def untracked_id(self, used: Set[int]) -> int:
        """
        Allocate an id for a box without a track, avoiding every tracked id of
        the sequence and the ids in `used`.

        Raises:
            InstanceRangeError: If no id is left in the scan
        """
        next_id = self._lowest_free(self.assigned | used)
        if next_id is None:
            raise InstanceRangeError(f"More than {MAX_INSTANCE_ID} boxes in one scan")
        self._untracked.add(next_id)
        return next_id

    @property
    def assigned(self) -> Set[int]:
        """Instance ids handed out to tracks so far."""
        return set(self._ids.values())

    def __contains__(self, track_id: TrackKey) -> bool:
        return track_id in self._ids

    def __len__(self) -> int:
        return len(self._ids)


def _track_sort_key(box: Box3D) -> Tuple[str, str]:
    return (type(box.track_id).__name__, str(box.track_id))


def _check_points(semantic: ScanLabels, points: np.ndarray) -> None:
    if points.shape[0] != semantic.point_count:
        raise LengthMismatchError(semantic.point_count, points.shape[0])


def fuse_gt(
    semantic: ScanLabels,
    points: np.ndarray,
    boxes: Sequence[Box3D],
    class_map: ClassMap,
    registry: Optional[TrackIdRegistry] = None,
) -> ScanLabels:
    """
    Build ground-truth panoptic labels from semantic labels and annotated boxes.

    A box qualifies for a point when the point lies inside it and carries the
    box's class. Points with one qualifying box get the box's instance id;
    points with two or more become noise.

    Args:
        semantic: Semantic labels in evaluation ids
        points: Point cloud of the scan, shape (N, >=3)
        boxes: Annotated boxes with classes in evaluation ids
        class_map: Class map (supplies the ignore id)
        registry: Track id registry of the sequence; a fresh one when omitted

    Returns:
        Panoptic labels in evaluation ids
    """
    _check_points(semantic, points)
    registry = registry if registry is not None else TrackIdRegistry()

    claims = np.zeros(semantic.point_count, dtype=np.int64)
    owner = np.zeros(semantic.point_count, dtype=np.int64)
    for box in sorted(boxes, key=_track_sort_key):
        if box.track_id is None:
            raise ValueError("Ground-truth boxes need a track id")
        instance_id = registry.register(box.track_id)
        inside = points_in_box(points, box)
        qualifying = inside[semantic.semantic[inside] == box.class_id]
        claims[qualifying] += 1
        owner[qualifying] = instance_id

    noise = claims >= 2
    single = claims == 1
    labels = np.where(noise, class_map.ignore_id, semantic.semantic)
    instance = np.where(single, owner, np.where(noise, 0, semantic.instance))
    instance = np.where(class_map.thing_mask(labels), instance, 0)
    if noise.any():
        logger.debug(f"{int(noise.sum())} points inside overlapping boxes became noise")
    return ScanLabels(semantic=labels, instance=instance)


def box_priority(boxes: Sequence[Box3D]) -> List[int]:
    """Indices of boxes ordered by score desc, volume desc, input order."""
    return sorted(
        range(len(boxes)), key=lambda i: (-boxes[i].score, -boxes[i].volume, i)
    )


def fuse_pred(
    semantic_pred: ScanLabels,
    points: np.ndarray,
    boxes: Sequence[Box3D],
    class_map: ClassMap,
    registry: Optional[TrackIdRegistry] = None,
) -> ScanLabels:
    """
    Build panoptic predictions from semantic predictions and detection boxes.

    Each box claims the still unassigned points inside it, giving them its
    class and an instance id: the registry id of its track, or a per-scan id
    for boxes without a track that no tracked box of the sequence uses.

    Args:
        semantic_pred: Semantic predictions in evaluation ids
        points: Point cloud of the scan, shape (N, >=3)
        boxes: Detection boxes (already filtered by score if wanted)
        class_map: Class map
        registry: Track id registry of the sequence for tracked boxes

    Returns:
        Panoptic predictions in evaluation ids; points outside every box keep
        their class with instance 0
    """
    _check_points(semantic_pred, points)
    registry = registry if registry is not None else TrackIdRegistry()

    order = [i for i in box_priority(boxes) if class_map.is_thing(boxes[i].class_id)]
    skipped = len(boxes) - len(order)
    if skipped:
        logger.warning(f"Skipped {skipped} boxes whose class is not a thing class")

    instance_ids: Dict[int, int] = {}
    for i in order:
        if boxes[i].track_id is not None:
            instance_ids[i] = registry.register(boxes[i].track_id)
    used: Set[int] = set()
    for i in order:
        if i not in instance_ids:
            instance_ids[i] = registry.untracked_id(used)
            used.add(instance_ids[i])

    labels = semantic_pred.semantic.copy()
    instance = np.zeros(semantic_pred.point_count, dtype=np.int64)
    assigned = np.zeros(semantic_pred.point_count, dtype=bool)
    for i in order:
        inside = points_in_box(points, boxes[i])
        claimed = inside[~assigned[inside]]
        labels[claimed] = boxes[i].class_id
        instance[claimed] = instance_ids[i]
        assigned[claimed] = True
    return ScanLabels(semantic=labels, instance=instance)


def select_boxes(
    boxes: Sequence[Box3D],
    config: FusionConfig,
    thresholds: Optional[Dict[int, float]] = None,
) -> List[Box3D]:
    """
    Apply the configured confidence filter.

    Args:
        boxes: Detection boxes
        config: Fusion settings
        thresholds: Per-class thresholds for max-f1 mode

    Returns:
        The boxes that pass, in input order
    """
    if config.threshold_mode == "none":
        return list(boxes)
    if config.threshold_mode == "fixed":
        return [box for box in boxes if box.score >= config.score_threshold]
    if config.threshold_mode == "per-class":
        per_class = config.class_thresholds
    else:
        per_class = thresholds or {}
    return [
        box for box in boxes if box.score >= per_class.get(box.class_id, config.score_threshold)
    ]


def _greedy_true_positives(
    detections: Sequence[Box3D], annotations: Sequence[Box3D], distance: float
) -> List[Tuple[float, bool]]:
    """Greedy by-score matching within one scan and class on ground-plane center distance."""
    taken = np.zeros(len(annotations), dtype=bool)
    centers = np.array([a.center[:2] for a in annotations], dtype=np.float64).reshape(-1, 2)
    outcome = []
    for i in box_priority(detections):
        box = detections[i]
        hit = False
        if centers.shape[0]:
            gaps = np.linalg.norm(centers - np.asarray(box.center[:2]), axis=1)
            gaps[taken] = np.inf
            nearest = int(np.argmin(gaps))
            if gaps[nearest] <= distance:
                taken[nearest] = True
                hit = True
        outcome.append((box.score, hit))
    return outcome


def select_max_f1_thresholds(
    detections: Sequence[Sequence[Box3D]],
    annotations: Sequence[Sequence[Box3D]],
    distance: float = DEFAULT_MAX_F1_DISTANCE,
) -> Dict[int, float]:
    """
    Per-class score thresholds maximizing detection F1.

    Detections and annotations are matched greedily by descending score on
    the ground-plane center distance. Greedy matching at a threshold equals the
    prefix of the full greedy pass, so one pass per scan scores every threshold.
    Ties in F1 keep the lowest threshold.

    Args:
        detections: Detection boxes per scan
        annotations: Annotated boxes per scan, aligned with detections
        distance: Maximum center distance of a match in meters

    Returns:
        class id -> threshold, for every class with at least one detection
    """
    if len(detections) != len(annotations):
        raise LengthMismatchError(len(annotations), len(detections))

    outcomes: Dict[int, List[Tuple[float, bool]]] = {}
    positives: Dict[int, int] = {}
    for scan_detections, scan_annotations in zip(detections, annotations):
        classes = {b.class_id for b in scan_detections} | {b.class_id for b in scan_annotations}
        for class_id in classes:
            dets = [b for b in scan_detections if b.class_id == class_id]
            gts = [b for b in scan_annotations if b.class_id == class_id]
            positives[class_id] = positives.get(class_id, 0) + len(gts)
            outcomes.setdefault(class_id, []).extend(_greedy_true_positives(dets, gts, distance))

    thresholds = {}
    for class_id, records in sorted(outcomes.items()):
        if not records:
            continue
        scores = np.array([score for score, _ in records])
        hits = np.array([hit for _, hit in records], dtype=bool)
        best_threshold, best_f1 = 0.0, -1.0
        for threshold in np.unique(scores):
            kept = scores >= threshold
            tp = int(np.sum(hits & kept))
            fp = int(np.sum(kept)) - tp
            fn = positives[class_id] - tp
            f1 = 2.0 * tp / max(2 * tp + fp + fn, 1)
            if f1 > best_f1:
                best_threshold, best_f1 = float(threshold), f1
        thresholds[class_id] = best_threshold
        logger.debug(f"Class {class_id}: max-F1 threshold {best_threshold:.3f} (F1 {best_f1:.3f})")
    return thresholds


def overlap_noise_statistics(
    pairs: Sequence[Tuple[ScanLabels, ScanLabels]], class_map: ClassMap
) -> pd.DataFrame:
    """
    Share of each thing class's points that ground-truth fusion turned into noise.

    Args:
        pairs: (semantic input, fused output) per scan, in evaluation ids
        class_map: Class map

    Returns:
        DataFrame with columns class_id, name, points, noise_points, noise_percent
    """
    thing_ids = class_map.thing_ids
    points = dict.fromkeys(thing_ids, 0)
    noise = dict.fromkeys(thing_ids, 0)
    for before, after in pairs:
        became_noise = (after.semantic == class_map.ignore_id) & (
            before.semantic != class_map.ignore_id
        )
        for class_id in thing_ids:
            of_class = before.semantic == class_id
            points[class_id] += int(of_class.sum())
            noise[class_id] += int((of_class & became_noise).sum())

    rows = []
    for class_id in thing_ids:
        share = 100.0 * noise[class_id] / points[class_id] if points[class_id] else 0.0
        rows.append(
            {
                "class_id": class_id,
                "name": class_map.eval_name(class_id),
                "points": points[class_id],
                "noise_points": noise[class_id],
                "noise_percent": round(share, 2),
            }
        )
    return pd.DataFrame(rows, columns=["class_id", "name", "points", "noise_points", "noise_percent"])
