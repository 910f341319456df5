# /src/eval/tracking_evaluate.py

"""
Panoptic Tracking Evaluation Module

This module scores temporally consistent panoptic predictions over whole
sequences with three complementary metrics:

- PAT, the harmonic mean of PQ and the tracking quality TQ. TQ combines an
  instance-level association score AS(g) with an ID-switch penalty per
  ground-truth track.
- PTQ, PQ with the ID switches subtracted from the matched IoU mass.
- LSTQ, the geometric mean of a semantic score (mIoU) and a point-level,
  class-agnostic association score over 4D tubes.

Tracks and predicted ids are keyed by the packed (class, instance) key, so a
car and a pedestrian may share an instance id. Matching between the two sides
stays class-agnostic.
"""

import logging
import math
from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from constant import MATCH_IOU_THRESHOLD, PANOPTIC_DIVISOR
from eval.panoptic_evaluate import PQStats, finalize, match_scan_pair
from eval.semantic_evaluate import ConfusionMatrix, miou
from models.config_models import EvaluationConfig
from models.exceptions import (
    FrameCountMismatchError,
    LengthMismatchError,
    NoPresentClassesError,
    TokenMismatchError,
)
from models.label_models import ClassMap, ScanLabels, SequenceLabels
from models.match_models import ScanMatches, TrackFrame, TrackRecord
from models.metric_models import (
    MeanComparison,
    SequenceBreakdown,
    TrackDiagnostic,
    TrackingResult,
)
from utils.label_utils import instance_void_mask, segment_keys

logger = logging.getLogger(__name__)

SequencePair = Tuple[SequenceLabels, SequenceLabels]


# ---------------------------------------------------------------------------
# Per-frame instance views
# ---------------------------------------------------------------------------


def instance_keys(scan: ScanLabels, class_map: ClassMap) -> np.ndarray:
    """Packed class * PANOPTIC_DIVISOR + instance of every thing point with an instance, 0 elsewhere."""
    return np.maximum(segment_keys(scan, class_map), 0)


def split_key(key: int) -> Tuple[int, int]:
    """(class id, instance id) of a packed key."""
    class_id, instance_id = divmod(int(key), PANOPTIC_DIVISOR)
    return class_id, instance_id


def drop_small_ids(ids: np.ndarray, threshold: int) -> np.ndarray:
    """Zero the keys holding at most `threshold` points."""
    labels, counts = np.unique(ids[ids > 0], return_counts=True)
    small = labels[counts <= threshold]
    if small.size == 0:
        return ids
    return np.where(np.isin(ids, small), 0, ids)


def frame_instance_ids(
    gt: ScanLabels,
    pred: ScanLabels,
    class_map: ClassMap,
    config: EvaluationConfig,
    token: Optional[str] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Packed instance keys of one frame after void handling and filtering.

    Args:
        gt: Ground-truth labels in evaluation ids
        pred: Predicted labels in evaluation ids
        class_map: Class map
        config: Evaluation flags
        token: Optional scan token for error messages

    Returns:
        (gt keys, pred keys, gt void mask); keys are 0 where there is no instance
    """
    if gt.point_count != pred.point_count:
        raise LengthMismatchError(gt.point_count, pred.point_count, token)

    gt_void = instance_void_mask(
        gt, class_map, config.min_points if config.filter_gt else None
    )
    gt_ids = np.where(gt_void, 0, instance_keys(gt, class_map))
    pred_ids = instance_keys(pred, class_map)
    if config.filter_pred:
        pred_ids = drop_small_ids(pred_ids, config.min_points)
    return gt_ids, pred_ids, gt_void


def _lookup_counts(labels: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Count occurrences of each of `labels` (sorted) within `values`."""
    counts = np.zeros(labels.shape[0], dtype=np.int64)
    if values.size:
        found, found_counts = np.unique(values, return_counts=True)
        counts[np.searchsorted(labels, found)] = found_counts
    return counts


def pair_counts(
    gt_ids: np.ndarray, pred_ids: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct (gt key, pred key) pairs where both are non-zero, with their point counts."""
    both = (gt_ids > 0) & (pred_ids > 0)
    pairs = np.stack([gt_ids[both], pred_ids[both]], axis=1)
    if pairs.shape[0] == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    unique_pairs, counts = np.unique(pairs, axis=0, return_counts=True)
    return unique_pairs[:, 0], unique_pairs[:, 1], counts


def match_frame(
    gt_ids: np.ndarray, pred_ids: np.ndarray, gt_void: np.ndarray
) -> Tuple[Dict[int, int], List[int], List[int]]:
    """
    Class-agnostic instance matching of one frame.

    Args:
        gt_ids: Ground-truth packed keys, 0 on non-instance and void points
        pred_ids: Predicted packed keys, 0 on non-instance points
        gt_void: Ground-truth void mask

    Returns:
        (gt key -> matched pred key, present gt keys, pred keys that appear)
    """
    gt_labels, gt_area = np.unique(gt_ids[gt_ids > 0], return_counts=True)
    has_pred = pred_ids > 0
    pred_labels, pred_size = np.unique(pred_ids[has_pred], return_counts=True)
    pred_void = _lookup_counts(pred_labels, pred_ids[has_pred & gt_void])

    pair_gt, pair_pred, intersections = pair_counts(gt_ids, pred_ids)
    g_index = np.searchsorted(gt_labels, pair_gt)
    p_index = np.searchsorted(pred_labels, pair_pred)

    unions = gt_area[g_index] + (pred_size - pred_void)[p_index] - intersections
    ious = intersections / unions.astype(np.float64)
    is_match = ious > MATCH_IOU_THRESHOLD

    matches = {
        int(gt_labels[g]): int(pred_labels[p])
        for g, p in zip(g_index[is_match], p_index[is_match])
    }
    matched_pred = set(matches.values())
    assert len(matched_pred) == len(matches), "prediction matched twice"

    appearing = [
        int(label)
        for label, size, void in zip(pred_labels, pred_size, pred_void)
        if int(label) in matched_pred or void <= 0.5 * size
    ]
    return matches, [int(g) for g in gt_labels], appearing


# ---------------------------------------------------------------------------
# Association: TPA / FPA, AS, IDS, TQ, PAT
# ---------------------------------------------------------------------------


class AssocTally:
    """
    Instance-level association counts of one sequence.

    TPA(p, g) counts frames where track g matched predicted id p; the
    appearances of p count the frames where p is a (non void-dominated)
    prediction. FNA(p, g) = |g| - TPA(p, g) and FPA(p, g) = appearances(p) - TPA(p, g).
    """

    def __init__(self):
        self.tpa: Dict[Tuple[int, int], int] = defaultdict(int)
        self.appearances: Dict[int, int] = defaultdict(int)

    def add_match(self, pred_id: int, gt_id: int) -> None:
        self.tpa[(pred_id, gt_id)] += 1

    def add_appearance(self, pred_id: int) -> None:
        self.appearances[pred_id] += 1

    def tpa_for(self, gt_id: int) -> Dict[int, int]:
        return {p: n for (p, g), n in self.tpa.items() if g == gt_id}

    def fpa(self, pred_id: int, gt_id: int) -> int:
        return self.appearances.get(pred_id, 0) - self.tpa.get((pred_id, gt_id), 0)


def match_frames(
    gt_seq: SequenceLabels,
    pred_seq: SequenceLabels,
    class_map: ClassMap,
    config: EvaluationConfig,
) -> Tuple[Dict[int, TrackRecord], AssocTally]:
    """
    Match every frame of a sequence and collect track histories.

    Args:
        gt_seq: Ground-truth sequence in evaluation ids
        pred_seq: Predicted sequence in evaluation ids
        class_map: Class map
        config: Evaluation flags

    Returns:
        (packed track key -> TrackRecord, association tally)

    Raises:
        FrameCountMismatchError: If the sequences differ in length
        TokenMismatchError: If the scan tokens differ
    """
    check_sequence_pair(gt_seq, pred_seq)

    records: Dict[int, TrackRecord] = {}
    tally = AssocTally()
    for frame_index, ((token, gt), pred) in enumerate(zip(gt_seq.scans, pred_seq.frames)):
        gt_ids, pred_ids, gt_void = frame_instance_ids(gt, pred, class_map, config, token)
        matches, present, appearing = match_frame(gt_ids, pred_ids, gt_void)

        for gt_id in present:
            if gt_id not in records:
                class_id, track_id = split_key(gt_id)
                records[gt_id] = TrackRecord(
                    sequence_id=gt_seq.sequence_id,
                    track_id=track_id,
                    class_id=class_id,
                )
            pred_id = matches.get(gt_id)
            records[gt_id].frames.append(
                TrackFrame(frame_index=frame_index, matched_pred_id=pred_id)
            )
            if pred_id is not None:
                tally.add_match(pred_id, gt_id)
        for pred_id in appearing:
            tally.add_appearance(pred_id)

    logger.debug(
        f"Sequence {gt_seq.sequence_id}: {len(records)} gt tracks, "
        f"{len(tally.appearances)} predicted ids"
    )
    return dict(sorted(records.items())), tally


def check_sequence_pair(gt_seq: SequenceLabels, pred_seq: SequenceLabels) -> None:
    if len(gt_seq) != len(pred_seq):
        raise FrameCountMismatchError(
            f"Sequence '{gt_seq.sequence_id}' has {len(gt_seq)} ground-truth frames "
            f"but {len(pred_seq)} predicted frames"
        )
    if gt_seq.tokens != pred_seq.tokens:
        raise TokenMismatchError(
            f"Sequence '{gt_seq.sequence_id}' lists different scan tokens for ground truth and prediction"
        )


def compute_as(record: TrackRecord, tally: AssocTally) -> float:
    """
    Association score AS(g) = (1/|g|) * sum_p TPA(p,g) * IoU_a(p,g).

    IoU_a(p,g) = TPA / (TPA + FNA + FPA) = TPA / (|g| + FPA).

    Args:
        record: Ground-truth track history
        tally: Association tally of the same sequence

    Returns:
        AS(g) in [0, 1]
    """
    length = record.length
    if length == 0:
        return 0.0
    total = 0.0
    for pred_id, tpa in sorted(tally.tpa_for(record.key).items()):
        fpa = tally.fpa(pred_id, record.key)
        total += tpa * tpa / float(length + fpa)
    return total / length


def compute_ids(record: TrackRecord, gap_mode: str = "skip") -> Tuple[int, int]:
    """
    Count ID switches over consecutive occurrences of a track.

    A pair switches when either frame is unmatched or the matched ids differ.
    With gap_mode "count" a presence gap between the two occurrences is a
    switch as well.

    Args:
        record: Ground-truth track history
        gap_mode: "skip" or "count"

    Returns:
        (IDS, N_IDS) with N_IDS = max(|g| - 1, 1)
    """
    switches = 0
    for previous, current in zip(record.frames, record.frames[1:]):
        if (
            previous.matched_pred_id is None
            or current.matched_pred_id is None
            or previous.matched_pred_id != current.matched_pred_id
        ):
            switches += 1
        elif gap_mode == "count" and current.frame_index - previous.frame_index > 1:
            switches += 1
    return switches, max(record.length - 1, 1)


def track_quality(association: float, ids: int, max_ids: int) -> float:
    """TQ(g) = sqrt((1 - IDS / N_IDS) * AS(g))."""
    return math.sqrt(max(0.0, (1.0 - ids / float(max_ids)) * association))


def diagnose_tracks(
    records: Dict[int, TrackRecord], tally: AssocTally, gap_mode: str = "skip"
) -> List[TrackDiagnostic]:
    """Per-track AS, IDS and TQ of one sequence, ordered by (class, track id)."""
    diagnostics = []
    for _, record in sorted(records.items()):
        association = compute_as(record, tally)
        ids, max_ids = compute_ids(record, gap_mode)
        diagnostics.append(
            TrackDiagnostic(
                sequence_id=record.sequence_id,
                track_id=record.track_id,
                class_id=record.class_id,
                length=record.length,
                association_score=association,
                id_switches=ids,
                max_id_switches=max_ids,
                tq=track_quality(association, ids, max_ids),
            )
        )
    return diagnostics


def compute_tq(
    tracks: Sequence[TrackDiagnostic], track_mean: str = "global"
) -> Optional[float]:
    """
    Aggregate per-track TQ(g).

    Args:
        tracks: Diagnostics of every ground-truth track of the split
        track_mean: "global" averages all tracks; "per-sequence" averages each
            sequence first, then the sequences

    Returns:
        TQ, or None when there is no ground-truth track
    """
    if not tracks:
        return None
    if track_mean == "global":
        return float(np.mean([t.tq for t in tracks]))

    by_sequence: Dict[str, List[float]] = defaultdict(list)
    for track in tracks:
        by_sequence[track.sequence_id].append(track.tq)
    return float(np.mean([np.mean(values) for values in by_sequence.values()]))


def compute_pat(pq: float, tq: float) -> float:
    """Harmonic mean of PQ and TQ, 0 when both are 0."""
    if pq + tq <= 0:
        return 0.0
    return 2.0 * pq * tq / (pq + tq)


def compare_means(pq: float, tq: float) -> MeanComparison:
    """Arithmetic, geometric and harmonic means of PQ and TQ."""
    return MeanComparison(
        arithmetic=(pq + tq) / 2.0,
        geometric=math.sqrt(pq * tq),
        harmonic=compute_pat(pq, tq),
    )


# ---------------------------------------------------------------------------
# PTQ
# ---------------------------------------------------------------------------


class PTQStats(PQStats):
    """PQ tallies plus per-class ID switches."""

    def __init__(self, num_classes: int):
        super().__init__(num_classes)
        self.ids = np.zeros(num_classes, dtype=np.int64)

    def merge(self, other: "PTQStats") -> "PTQStats":
        merged = PTQStats(self.num_classes)
        merged.iou_sum = self.iou_sum + other.iou_sum
        merged.tp = self.tp + other.tp
        merged.fp = self.fp + other.fp
        merged.fn = self.fn + other.fn
        merged.ids = self.ids + other.ids
        return merged

    def per_class_ptq(self) -> np.ndarray:
        """(sum IoU - IDS) / (TP + FP/2 + FN/2) per class, NaN when absent, floored at 0."""
        denominator = self.tp + 0.5 * self.fp + 0.5 * self.fn
        ptq = np.full(self.num_classes, np.nan)
        present = self.present
        ptq[present] = np.maximum(
            0.0, (self.iou_sum[present] - self.ids[present]) / denominator[present]
        )
        return ptq


class SwitchMemory:
    """Last matched predicted id of every ground-truth thing segment of a sequence."""

    def __init__(self, class_map: ClassMap):
        self.class_map = class_map
        self.last_match: Dict[Tuple[int, int], int] = {}

    def count(self, matches: ScanMatches) -> np.ndarray:
        """Record one frame's matches and return its ID switches per class."""
        ids = np.zeros(self.class_map.num_eval_classes, dtype=np.int64)
        for pair in matches.tp:
            if not self.class_map.is_thing(pair.class_id):
                continue
            key = (pair.class_id, pair.gt_instance)
            previous = self.last_match.get(key)
            if previous is not None and previous != pair.pred_instance:
                ids[pair.class_id] += 1
            self.last_match[key] = pair.pred_instance
        return ids


def accumulate_ptq_sequence(
    gt_seq: SequenceLabels,
    pred_seq: SequenceLabels,
    class_map: ClassMap,
    config: EvaluationConfig,
) -> PTQStats:
    """
    PQ-style tallies and ID switches of one sequence.

    Args:
        gt_seq: Ground-truth sequence in evaluation ids
        pred_seq: Predicted sequence in evaluation ids
        class_map: Class map
        config: Evaluation flags

    Returns:
        PTQStats of the sequence
    """
    check_sequence_pair(gt_seq, pred_seq)
    stats = PTQStats(class_map.num_eval_classes)
    memory = SwitchMemory(class_map)
    for (token, gt), pred in zip(gt_seq.scans, pred_seq.frames):
        matches = match_scan_pair(gt, pred, class_map, config, token)
        stats.add(matches)
        stats.ids += memory.count(matches)
    return stats


def finalize_ptq(
    stats: PTQStats, class_map: ClassMap
) -> Tuple[float, Dict[str, Optional[float]]]:
    """
    Average per-class PTQ over present classes.

    Returns:
        (PTQ, class name -> PTQ or None)

    Raises:
        NoPresentClassesError: If no class has a segment
    """
    ptq = stats.per_class_ptq()
    present = ~np.isnan(ptq)
    if not present.any():
        raise NoPresentClassesError("PTQ is undefined: every class is absent")
    per_class = {
        class_map.eval_name(c): (None if np.isnan(ptq[c]) else float(ptq[c]))
        for c in range(stats.num_classes)
    }
    return float(ptq[present].mean()), per_class


def compute_ptq(
    pairs: Iterable[SequencePair], class_map: ClassMap, config: EvaluationConfig
) -> float:
    """
    PTQ of a split: per-class tallies over all sequences, averaged over present classes.

    Args:
        pairs: (ground truth, prediction) sequences
        class_map: Class map
        config: Evaluation flags

    Returns:
        PTQ in [0, 1]
    """
    stats = PTQStats(class_map.num_eval_classes)
    for gt_seq, pred_seq in pairs:
        stats = stats.merge(accumulate_ptq_sequence(gt_seq, pred_seq, class_map, config))
    return finalize_ptq(stats, class_map)[0]


# ---------------------------------------------------------------------------
# LSTQ
# ---------------------------------------------------------------------------


class TubeIndex:
    """
    Point-level 4D tubes of one sequence.

    Tube sizes and pairwise intersections are counted over ground-truth
    non-void points only, class-agnostically.
    """

    def __init__(self):
        self.gt_sizes: Counter = Counter()
        self.pred_sizes: Counter = Counter()
        self.intersections: Dict[int, Counter] = defaultdict(Counter)

    def add_frame(self, gt_ids: np.ndarray, pred_ids: np.ndarray, valid: np.ndarray) -> None:
        gt, pred = gt_ids[valid], pred_ids[valid]
        for label, count in zip(*np.unique(gt[gt > 0], return_counts=True)):
            self.gt_sizes[int(label)] += int(count)
        for label, count in zip(*np.unique(pred[pred > 0], return_counts=True)):
            self.pred_sizes[int(label)] += int(count)
        for g, p, count in zip(*pair_counts(gt, pred)):
            self.intersections[int(g)][int(p)] += int(count)

    def association_scores(self) -> List[float]:
        """
        Per gt tube g, (1/|g|) * sum_p |p∩g| * |p∩g| / (|p| + |g| - |p∩g|).

        Returns:
            Scores ordered by packed gt key
        """
        scores = []
        for g in sorted(self.gt_sizes):
            size = self.gt_sizes[g]
            total = 0.0
            for p, inter in sorted(self.intersections[g].items()):
                total += inter * inter / float(self.pred_sizes[p] + size - inter)
            scores.append(total / size)
        return scores


def build_tubes(
    gt_seq: SequenceLabels,
    pred_seq: SequenceLabels,
    class_map: ClassMap,
    config: EvaluationConfig,
) -> TubeIndex:
    """Collect the tubes of one sequence pair."""
    check_sequence_pair(gt_seq, pred_seq)
    tubes = TubeIndex()
    for (token, gt), pred in zip(gt_seq.scans, pred_seq.frames):
        gt_ids, pred_ids, gt_void = frame_instance_ids(gt, pred, class_map, config, token)
        tubes.add_frame(gt_ids, pred_ids, ~gt_void)
    return tubes


def lstq_from_parts(
    tube_scores: Sequence[float], cm: ConfusionMatrix
) -> Tuple[float, float, Optional[float]]:
    """
    Combine association scores and the semantic matrix into LSTQ.

    Args:
        tube_scores: Association score of every gt tube of the split
        cm: Confusion matrix of the split

    Returns:
        (LSTQ, S_cls, S_assoc); S_assoc is None without gt tubes and LSTQ = S_cls
    """
    s_cls = miou(cm)
    if len(tube_scores) == 0:
        return s_cls, s_cls, None
    s_assoc = float(np.mean(tube_scores))
    return math.sqrt(s_assoc * s_cls), s_cls, s_assoc


def compute_lstq(
    pairs: Iterable[SequencePair], class_map: ClassMap, config: EvaluationConfig
) -> Tuple[float, float, Optional[float]]:
    """
    LSTQ of a split.

    Args:
        pairs: (ground truth, prediction) sequences
        class_map: Class map
        config: Evaluation flags

    Returns:
        (LSTQ, S_cls, S_assoc)
    """
    cm = ConfusionMatrix.for_class_map(class_map)
    scores: List[float] = []
    for gt_seq, pred_seq in pairs:
        scores.extend(build_tubes(gt_seq, pred_seq, class_map, config).association_scores())
        for (token, gt), pred in zip(gt_seq.scans, pred_seq.frames):
            cm.add_scan(gt, pred, token)
    return lstq_from_parts(scores, cm)


# ---------------------------------------------------------------------------
# Sequence-level orchestration
# ---------------------------------------------------------------------------


class SequenceTally:
    """Everything the split-level tracking metrics need from one sequence."""

    def __init__(self, sequence_id: str, frames: int, class_map: ClassMap):
        self.sequence_id = sequence_id
        self.frames = frames
        self.cm = ConfusionMatrix.for_class_map(class_map)
        self.ptq_stats = PTQStats(class_map.num_eval_classes)
        self.tracks: List[TrackDiagnostic] = []
        self.tube_scores: List[float] = []


def evaluate_sequence(
    gt_seq: SequenceLabels,
    pred_seq: SequenceLabels,
    class_map: ClassMap,
    config: EvaluationConfig,
) -> SequenceTally:
    """
    Tally one sequence pair for PAT, PTQ and LSTQ in a single pass.

    Args:
        gt_seq: Ground-truth sequence in evaluation ids
        pred_seq: Predicted sequence in evaluation ids
        class_map: Class map
        config: Evaluation flags

    Returns:
        SequenceTally
    """
    check_sequence_pair(gt_seq, pred_seq)
    tally = SequenceTally(gt_seq.sequence_id, len(gt_seq), class_map)
    if len(gt_seq) == 0:
        logger.warning(f"Sequence {gt_seq.sequence_id} has no scans")

    memory = SwitchMemory(class_map)
    tubes = TubeIndex()
    for (token, gt), pred in zip(gt_seq.scans, pred_seq.frames):
        tally.cm.add_scan(gt, pred, token)
        matches = match_scan_pair(gt, pred, class_map, config, token)
        tally.ptq_stats.add(matches)
        tally.ptq_stats.ids += memory.count(matches)
        gt_ids, pred_ids, gt_void = frame_instance_ids(gt, pred, class_map, config, token)
        tubes.add_frame(gt_ids, pred_ids, ~gt_void)

    records, assoc = match_frames(gt_seq, pred_seq, class_map, config)
    tally.tracks = diagnose_tracks(records, assoc, config.ids_gap_mode)
    tally.tube_scores = tubes.association_scores()
    return tally


def reduce_tallies(
    tallies: Sequence[SequenceTally], class_map: ClassMap
) -> SequenceTally:
    """Merge sequence tallies in the given order."""
    merged = SequenceTally("all", 0, class_map)
    for tally in tallies:
        merged.frames += tally.frames
        merged.cm = merged.cm.merge(tally.cm)
        merged.ptq_stats = merged.ptq_stats.merge(tally.ptq_stats)
        merged.tracks.extend(tally.tracks)
        merged.tube_scores.extend(tally.tube_scores)
    return merged


def finalize_tracking(
    tallies: Sequence[SequenceTally], class_map: ClassMap, config: EvaluationConfig
) -> TrackingResult:
    """
    Finalize PAT, PTQ and LSTQ over a split.

    Args:
        tallies: Per-sequence tallies in manifest order
        class_map: Class map
        config: Evaluation flags

    Returns:
        TrackingResult
    """
    merged = reduce_tallies(tallies, class_map)
    pq = finalize(merged.ptq_stats, class_map, merged.cm).pq
    tq = compute_tq(merged.tracks, config.track_mean)
    if tq is None:
        logger.warning("No ground-truth thing tracks in the split: TQ is undefined, PAT = PQ")
    pat = pq if tq is None else compute_pat(pq, tq)
    ptq, per_class_ptq = finalize_ptq(merged.ptq_stats, class_map)
    lstq, s_cls, s_assoc = lstq_from_parts(merged.tube_scores, merged.cm)

    return TrackingResult(
        pat=pat,
        pq=pq,
        tq=tq,
        ptq=ptq,
        lstq=lstq,
        s_cls=s_cls,
        s_assoc=s_assoc,
        total_ids=sum(t.id_switches for t in merged.tracks),
        ptq_ids=int(merged.ptq_stats.ids.sum()),
        per_class_ptq=per_class_ptq,
        tracks=merged.tracks,
        mean_comparison=None if tq is None else compare_means(pq, tq),
    )


def sequence_breakdown(
    tally: SequenceTally, class_map: ClassMap, config: EvaluationConfig
) -> SequenceBreakdown:
    """Scores of one sequence evaluated on its own; undefined scores are None."""
    breakdown = SequenceBreakdown(
        sequence_id=tally.sequence_id,
        frames=tally.frames,
        gt_tracks=len(tally.tracks),
        total_ids=sum(t.id_switches for t in tally.tracks),
    )
    try:
        result = finalize_tracking([tally], class_map, config)
    except NoPresentClassesError:
        logger.warning(f"Sequence {tally.sequence_id} has no scored class")
        return breakdown
    breakdown.miou = result.s_cls
    breakdown.pq = result.pq
    breakdown.tq = result.tq
    breakdown.pat = result.pat
    breakdown.ptq = result.ptq
    breakdown.lstq = result.lstq
    return breakdown


def evaluate_tracking(
    pairs: Iterable[SequencePair], class_map: ClassMap, config: EvaluationConfig
) -> TrackingResult:
    """Serial convenience wrapper: tally every sequence pair, then finalize."""
    tallies = [
        evaluate_sequence(gt_seq, pred_seq, class_map, config) for gt_seq, pred_seq in pairs
    ]
    return finalize_tracking(tallies, class_map, config)
