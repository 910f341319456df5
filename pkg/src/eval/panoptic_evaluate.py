# /src/eval/panoptic_evaluate.py

"""
Panoptic Segmentation Evaluation Module

This module matches ground-truth and predicted segments scan by scan and scores
the PQ family: PQ, SQ and RQ per class, thing/stuff aggregates and PQ-dagger.

Matching follows the PQ convention. Segments of the same class match iff their
point IoU exceeds 0.5, which makes the matching unique. Ground-truth void points
(ignore class, thing points without an instance, instances removed by the
point filter) are left out of every IoU, and a predicted segment lying mostly
on void is not counted as a false positive.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from constant import MATCH_IOU_THRESHOLD
from eval.semantic_evaluate import ConfusionMatrix, iou_per_class
from models.config_models import EvaluationConfig
from models.exceptions import LengthMismatchError, NoPresentClassesError
from models.label_models import ClassMap, ScanLabels, Segment
from models.match_models import MatchedPair, ScanMatches, UnmatchedSegment
from models.metric_models import ClassPanopticScore, PanopticResult
from utils.label_utils import extract_segments, filter_min_points

logger = logging.getLogger(__name__)


def label_segments(
    segments: List[Segment], scan: ScanLabels, class_map: ClassMap
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Paint segment indices onto the points of a scan.

    Thing segments come from `segments`; every stuff class present in the scan
    adds one segment holding all its points.

    Args:
        segments: Thing segments of the scan (already filtered)
        scan: Labels in evaluation ids
        class_map: Class map

    Returns:
        (per-point segment index or -1, array of (class_id, instance_id) rows)
    """
    segment_id = np.full(scan.point_count, -1, dtype=np.int64)
    info = []
    for index, segment in enumerate(segments):
        segment_id[segment.point_indices] = index
        info.append((segment.class_id, segment.instance_id))

    semantic = scan.semantic
    in_range = (semantic >= 0) & (semantic < class_map.num_eval_classes)
    stuff = in_range & ~class_map.thing_mask(semantic)
    for class_id in np.unique(semantic[stuff]):
        segment_id[semantic == class_id] = len(info)
        info.append((int(class_id), 0))

    return segment_id, np.asarray(info, dtype=np.int64).reshape(-1, 2)


def match_scan(
    gt_segments: List[Segment],
    pred_segments: List[Segment],
    gt_scan: ScanLabels,
    pred_scan: ScanLabels,
    class_map: ClassMap,
) -> ScanMatches:
    """
    Match ground-truth and predicted segments of one scan.

    Args:
        gt_segments: Filtered ground-truth thing segments
        pred_segments: Filtered predicted thing segments
        gt_scan: Ground-truth labels in evaluation ids
        pred_scan: Predicted labels in evaluation ids
        class_map: Class map

    Returns:
        ScanMatches with true positives, false positives and false negatives
    """
    if gt_scan.point_count != pred_scan.point_count:
        raise LengthMismatchError(gt_scan.point_count, pred_scan.point_count)

    gt_id, gt_info = label_segments(gt_segments, gt_scan, class_map)
    pred_id, pred_info = label_segments(pred_segments, pred_scan, class_map)
    n_gt, n_pred = gt_info.shape[0], pred_info.shape[0]

    gt_void = gt_id < 0
    has_pred = pred_id >= 0
    gt_area = np.bincount(gt_id[~gt_void], minlength=n_gt)
    pred_size = np.bincount(pred_id[has_pred], minlength=n_pred)
    pred_void = np.bincount(pred_id[has_pred & gt_void], minlength=n_pred)
    pred_area = pred_size - pred_void

    both = ~gt_void & has_pred
    g_points, p_points = gt_id[both], pred_id[both]
    same_class = gt_info[g_points, 0] == pred_info[p_points, 0]
    pairs = g_points[same_class] * max(n_pred, 1) + p_points[same_class]
    unique_pairs, intersections = np.unique(pairs, return_counts=True)
    g_index = unique_pairs // max(n_pred, 1)
    p_index = unique_pairs % max(n_pred, 1)

    unions = gt_area[g_index] + pred_area[p_index] - intersections
    ious = intersections / unions.astype(np.float64)
    is_match = ious > MATCH_IOU_THRESHOLD

    g_matched, p_matched = g_index[is_match], p_index[is_match]
    assert np.unique(g_matched).size == g_matched.size, "ground truth matched twice"
    assert np.unique(p_matched).size == p_matched.size, "prediction matched twice"

    matched_gt = np.zeros(n_gt, dtype=bool)
    matched_gt[g_matched] = True
    matched_pred = np.zeros(n_pred, dtype=bool)
    matched_pred[p_matched] = True
    void_dominated = pred_void > 0.5 * pred_size

    tp = [
        MatchedPair(
            class_id=int(gt_info[g, 0]),
            gt_instance=int(gt_info[g, 1]),
            pred_instance=int(pred_info[p, 1]),
            iou=float(iou),
        )
        for g, p, iou in zip(g_matched, p_matched, ious[is_match])
    ]
    fp = [
        UnmatchedSegment(class_id=int(pred_info[p, 0]), instance_id=int(pred_info[p, 1]))
        for p in np.flatnonzero(~matched_pred & ~void_dominated)
    ]
    fn = [
        UnmatchedSegment(class_id=int(gt_info[g, 0]), instance_id=int(gt_info[g, 1]))
        for g in np.flatnonzero(~matched_gt)
    ]

    tp.sort(key=lambda m: (m.class_id, m.gt_instance))
    fp.sort(key=lambda s: (s.class_id, s.instance_id))
    fn.sort(key=lambda s: (s.class_id, s.instance_id))
    return ScanMatches(tp=tp, fp=fp, fn=fn)


def match_scan_pair(
    gt: ScanLabels,
    pred: ScanLabels,
    class_map: ClassMap,
    config: EvaluationConfig,
    token: Optional[str] = None,
) -> ScanMatches:
    """
    Extract, filter and match the segments of one scan pair.

    Args:
        gt: Ground-truth labels in evaluation ids
        pred: Predicted labels in evaluation ids
        class_map: Class map
        config: Evaluation flags (minimum points and which side it applies to)
        token: Optional scan token for error messages

    Returns:
        ScanMatches of the pair
    """
    if gt.point_count != pred.point_count:
        raise LengthMismatchError(gt.point_count, pred.point_count, token)
    gt_segments = extract_segments(gt, class_map)
    pred_segments = extract_segments(pred, class_map)
    if config.filter_gt:
        gt_segments = filter_min_points(gt_segments, config.min_points)
    if config.filter_pred:
        pred_segments = filter_min_points(pred_segments, config.min_points)
    return match_scan(gt_segments, pred_segments, gt, pred, class_map)


class PQStats:
    """Mergeable per-class PQ tallies: IoU sum over matches, TP, FP, FN."""

    def __init__(self, num_classes: int):
        self.num_classes = num_classes
        self.iou_sum = np.zeros(num_classes, dtype=np.float64)
        self.tp = np.zeros(num_classes, dtype=np.int64)
        self.fp = np.zeros(num_classes, dtype=np.int64)
        self.fn = np.zeros(num_classes, dtype=np.int64)

    def add(self, matches: ScanMatches) -> None:
        """Accumulate one scan's matches in place."""
        for pair in matches.tp:
            self.iou_sum[pair.class_id] += pair.iou
            self.tp[pair.class_id] += 1
        for segment in matches.fp:
            self.fp[segment.class_id] += 1
        for segment in matches.fn:
            self.fn[segment.class_id] += 1

    def merge(self, other: "PQStats") -> "PQStats":
        merged = PQStats(self.num_classes)
        merged.iou_sum = self.iou_sum + other.iou_sum
        merged.tp = self.tp + other.tp
        merged.fp = self.fp + other.fp
        merged.fn = self.fn + other.fn
        return merged

    @property
    def present(self) -> np.ndarray:
        return (self.tp + self.fp + self.fn) > 0

    def per_class(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Per-class PQ, SQ and RQ.

        Returns:
            (pq, sq, rq) arrays, NaN for absent classes
        """
        tp = self.tp.astype(np.float64)
        denominator = tp + 0.5 * self.fp + 0.5 * self.fn
        present = self.present
        pq = np.full(self.num_classes, np.nan)
        sq = np.full(self.num_classes, np.nan)
        rq = np.full(self.num_classes, np.nan)
        pq[present] = self.iou_sum[present] / denominator[present]
        rq[present] = tp[present] / denominator[present]
        sq[present] = np.where(
            tp[present] > 0, self.iou_sum[present] / np.maximum(tp[present], 1.0), 0.0
        )
        return pq, sq, rq


def accumulate_pq(stats: PQStats, matches: ScanMatches) -> PQStats:
    """Return new stats with one scan's matches added."""
    scan_stats = PQStats(stats.num_classes)
    scan_stats.add(matches)
    return stats.merge(scan_stats)


def _mean_or_none(values: np.ndarray) -> Optional[float]:
    return float(values.mean()) if values.size else None


def finalize(
    stats: PQStats, class_map: ClassMap, cm: Optional[ConfusionMatrix] = None
) -> PanopticResult:
    """
    Turn accumulated tallies into per-class and aggregate scores.

    Args:
        stats: PQ tallies accumulated over the split
        class_map: Class map with thing/stuff flags
        cm: Confusion matrix of the same split; supplies stuff IoU for PQ-dagger
            and the mIoU column

    Returns:
        PanopticResult

    Raises:
        NoPresentClassesError: If no class has a segment in the split
    """
    pq, sq, rq = stats.per_class()
    present = stats.present
    if not present.any():
        raise NoPresentClassesError("PQ is undefined: every class is absent")

    semantic_iou = iou_per_class(cm) if cm is not None else np.full(stats.num_classes, np.nan)
    is_thing = np.array([class_map.is_thing(c) for c in range(stats.num_classes)], dtype=bool)
    things = present & is_thing
    stuff = present & ~is_thing

    # without a confusion matrix stuff falls back to its PQ
    stuff_score = np.nan_to_num(semantic_iou, nan=0.0) if cm is not None else pq
    dagger = np.where(is_thing, pq, stuff_score)

    per_class = []
    for c in range(stats.num_classes):
        per_class.append(
            ClassPanopticScore(
                class_id=c,
                name=class_map.eval_name(c),
                is_thing=bool(is_thing[c]),
                pq=None if not present[c] else float(pq[c]),
                sq=None if not present[c] else float(sq[c]),
                rq=None if not present[c] else float(rq[c]),
                iou=None if np.isnan(semantic_iou[c]) else float(semantic_iou[c]),
                tp=int(stats.tp[c]),
                fp=int(stats.fp[c]),
                fn=int(stats.fn[c]),
            )
        )

    present_iou = semantic_iou[~np.isnan(semantic_iou)]
    return PanopticResult(
        per_class=per_class,
        pq=float(pq[present].mean()),
        sq=float(sq[present].mean()),
        rq=float(rq[present].mean()),
        pq_dagger=float(dagger[present].mean()),
        pq_things=_mean_or_none(pq[things]),
        sq_things=_mean_or_none(sq[things]),
        rq_things=_mean_or_none(rq[things]),
        pq_stuff=_mean_or_none(pq[stuff]),
        sq_stuff=_mean_or_none(sq[stuff]),
        rq_stuff=_mean_or_none(rq[stuff]),
        miou=_mean_or_none(present_iou) if cm is not None else None,
    )


def evaluate_panoptic_scan(
    gt: ScanLabels,
    pred: ScanLabels,
    class_map: ClassMap,
    config: EvaluationConfig,
    token: Optional[str] = None,
) -> Tuple[ConfusionMatrix, PQStats]:
    """
    Score one scan pair for both semantic and panoptic tallies.

    Args:
        gt: Ground-truth labels in evaluation ids
        pred: Predicted labels in evaluation ids
        class_map: Class map
        config: Evaluation flags
        token: Optional scan token for error messages

    Returns:
        (confusion matrix, PQ stats) of the scan
    """
    cm = ConfusionMatrix.for_class_map(class_map)
    cm.add_scan(gt, pred, token)
    stats = PQStats(class_map.num_eval_classes)
    stats.add(match_scan_pair(gt, pred, class_map, config, token))
    return cm, stats
