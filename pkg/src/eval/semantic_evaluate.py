# /src/eval/semantic_evaluate.py

"""
Semantic Segmentation Evaluation Module

This module scores point-level semantic segmentation with a confusion matrix:
per-class IoU, mean IoU over present classes and frequency-weighted IoU.
"""

import logging
from typing import Iterable, List, Optional

import numpy as np

from models.exceptions import LengthMismatchError, NoPresentClassesError
from models.label_models import ClassMap, ScanLabels
from models.metric_models import ClassIoU, SemanticResult

logger = logging.getLogger(__name__)


class ConfusionMatrix:
    """
    Mergeable point-level confusion matrix.

    Rows are ground truth, columns are prediction. Ground-truth ignore points are
    dropped. Valid ground-truth points predicted as ignore (or as an id outside the
    evaluation range) are kept in `missed`: they are false negatives of their row
    and false positives of nobody.
    """

    def __init__(self, num_classes: int, ignore_id: int):
        self.num_classes = num_classes
        self.ignore_id = ignore_id
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)
        self.missed = np.zeros(num_classes, dtype=np.int64)

    @classmethod
    def for_class_map(cls, class_map: ClassMap) -> "ConfusionMatrix":
        return cls(class_map.num_eval_classes, class_map.ignore_id)

    @property
    def total_points(self) -> int:
        return int(self.counts.sum() + self.missed.sum())

    def add_scan(self, gt: ScanLabels, pred: ScanLabels, token: Optional[str] = None) -> None:
        """
        Accumulate one scan pair in place.

        Args:
            gt: Ground-truth labels in evaluation ids
            pred: Predicted labels in evaluation ids
            token: Optional scan token for error messages
        """
        if gt.point_count != pred.point_count:
            raise LengthMismatchError(gt.point_count, pred.point_count, token)

        n = self.num_classes
        gt_valid = (gt.semantic >= 0) & (gt.semantic < n)
        labels = gt.semantic[gt_valid]
        preds = pred.semantic[gt_valid]

        pred_valid = (preds >= 0) & (preds < n)
        flat = n * labels[pred_valid] + preds[pred_valid]
        self.counts += np.bincount(flat, minlength=n * n).reshape(n, n)
        self.missed += np.bincount(labels[~pred_valid], minlength=n)

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Cell-wise sum of two matrices."""
        if (self.num_classes, self.ignore_id) != (other.num_classes, other.ignore_id):
            raise ValueError("Cannot merge confusion matrices of different class spaces")
        merged = ConfusionMatrix(self.num_classes, self.ignore_id)
        merged.counts = self.counts + other.counts
        merged.missed = self.missed + other.missed
        return merged

    def gt_points_per_class(self) -> np.ndarray:
        return self.counts.sum(axis=1) + self.missed

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return (
            self.num_classes == other.num_classes
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.missed, other.missed)
        )


def accumulate(cm: ConfusionMatrix, gt: ScanLabels, pred: ScanLabels) -> ConfusionMatrix:
    """
    Return a new matrix with one scan pair added.

    Args:
        cm: Matrix accumulated so far (left untouched)
        gt: Ground-truth labels
        pred: Predicted labels

    Returns:
        Updated matrix
    """
    scan_cm = ConfusionMatrix(cm.num_classes, cm.ignore_id)
    scan_cm.add_scan(gt, pred)
    return cm.merge(scan_cm)


def iou_per_class(cm: ConfusionMatrix) -> np.ndarray:
    """
    Per-class IoU = TP / (TP + FP + FN).

    Args:
        cm: Confusion matrix

    Returns:
        float64 array, NaN for classes with an empty denominator (absent)
    """
    tp = np.diag(cm.counts).astype(np.float64)
    fp = cm.counts.sum(axis=0) - tp
    fn = cm.gt_points_per_class() - tp
    denominator = tp + fp + fn
    iou = np.full(cm.num_classes, np.nan)
    present = denominator > 0
    iou[present] = tp[present] / denominator[present]
    return iou


def miou(cm: ConfusionMatrix) -> float:
    """Unweighted mean IoU over present classes."""
    iou = iou_per_class(cm)
    present = ~np.isnan(iou)
    if not present.any():
        raise NoPresentClassesError("mIoU is undefined: every class is absent")
    return float(iou[present].mean())


def fwiou(cm: ConfusionMatrix) -> float:
    """Frequency-weighted IoU: sum over present classes of gt share times IoU."""
    iou = iou_per_class(cm)
    present = ~np.isnan(iou)
    if not present.any():
        raise NoPresentClassesError("fwIoU is undefined: every class is absent")
    total = cm.total_points
    if total == 0:
        return 0.0
    frequency = cm.gt_points_per_class() / float(total)
    return float(np.sum(frequency[present] * iou[present]))


def finalize_semantic(cm: ConfusionMatrix, class_map: ClassMap) -> SemanticResult:
    """
    Build the semantic section of a report.

    Args:
        cm: Confusion matrix accumulated over the split
        class_map: Class map for class names

    Returns:
        SemanticResult with per-class IoU, mIoU and fwIoU
    """
    iou = iou_per_class(cm)
    per_class = []
    for class_id in range(cm.num_classes):
        value = None if np.isnan(iou[class_id]) else float(iou[class_id])
        if value is None:
            logger.debug(f"Class {class_map.eval_name(class_id)} is absent from the split")
        per_class.append(
            ClassIoU(class_id=class_id, name=class_map.eval_name(class_id), iou=value)
        )
    return SemanticResult(
        per_class=per_class,
        miou=miou(cm),
        fwiou=fwiou(cm),
        total_points=cm.total_points,
    )


def evaluate_semantic_pairs(
    pairs: Iterable, class_map: ClassMap
) -> ConfusionMatrix:
    """
    Accumulate a confusion matrix over (gt, pred) scan pairs.

    Args:
        pairs: Iterable of (gt, pred) ScanLabels
        class_map: Class map of the evaluation space

    Returns:
        Accumulated matrix
    """
    cm = ConfusionMatrix.for_class_map(class_map)
    for gt, pred in pairs:
        cm.add_scan(gt, pred)
    return cm
