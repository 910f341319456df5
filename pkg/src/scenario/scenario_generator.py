# /src/scenario/scenario_generator.py

"""
Scenario Generator Module

This module synthesizes ground-truth/prediction sequence pairs from a
ScenarioSpec and provides plan operators that corrupt the prediction side
in controlled ways (ID splits, ID transfers, dropped and voided instances) plus
a common frame permutation.

Every instance mask is a disjoint block of points; a stuff background block
is appended to each scan. Point order inside a scan is shuffled with the spec
seed, identically for ground truth and prediction.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from constant import LABEL_FILE_SUFFIX
from models.exceptions import (
    BadPermutationError,
    InvalidPlanError,
    OutOfRangeFrameError,
)
from models.label_models import ClassMap, ClassMapEntry, ScanLabels, SequenceLabels
from models.scenario_models import DROP, VOID, PlanEntry, ScenarioSpec, TrackSpec
from utils.label_io import dump_structured, save_class_map, save_labels

logger = logging.getLogger(__name__)

SequencePair = Tuple[SequenceLabels, SequenceLabels]

SCENARIO_CLASS_MAP = ClassMap(
    entries=[
        ClassMapEntry(raw_id=0, eval_id=0, name="car", is_thing=True),
        ClassMapEntry(raw_id=1, eval_id=1, name="pedestrian", is_thing=True),
        ClassMapEntry(raw_id=2, eval_id=2, name="vegetation"),
        ClassMapEntry(raw_id=255, eval_id=255, name="void", is_ignore=True),
    ],
    num_eval_classes=3,
    ignore_id=255,
)
BACKGROUND_CLASS = 2


def frame_token(sequence_id: str, frame: int) -> str:
    return f"{sequence_id}_{frame:03d}"


def validate_spec(spec: ScenarioSpec, class_map: ClassMap = SCENARIO_CLASS_MAP) -> None:
    """
    Check the cross-field rules of a spec.

    Raises:
        InvalidPlanError: If a track leaves the frame range, a class is not a
            thing class, or the plan does not cover the track presence exactly
    """
    seen = set()
    for track in spec.tracks:
        if track.track_id in seen:
            raise InvalidPlanError(f"Track id {track.track_id} is used twice")
        seen.add(track.track_id)
        if not 1 <= track.first_frame <= track.last_frame <= spec.frames:
            raise InvalidPlanError(
                f"Track {track.track_id} spans frames {track.first_frame}-{track.last_frame}, "
                f"outside 1-{spec.frames}"
            )
        if not class_map.is_thing(track.class_id):
            raise InvalidPlanError(
                f"Track {track.track_id} has class {track.class_id}, which is not a thing class"
            )
        plan = spec.pred_plan.get(track.track_id)
        if plan is None:
            raise InvalidPlanError(f"No prediction plan for track {track.track_id}")
        if len(plan) != track.length:
            raise InvalidPlanError(
                f"Plan of track {track.track_id} has {len(plan)} entries for {track.length} frames"
            )
        for entry in plan:
            if isinstance(entry, int) and not 1 <= entry <= 999:
                raise InvalidPlanError(
                    f"Predicted id {entry} of track {track.track_id} is outside 1-999"
                )

    extra = sorted(set(spec.pred_plan) - seen)
    if extra:
        raise InvalidPlanError(f"Plan lists tracks {extra} that do not exist")


def generate(
    spec: ScenarioSpec, class_map: ClassMap = SCENARIO_CLASS_MAP
) -> SequencePair:
    """
    Synthesize the ground-truth and predicted sequences of a spec.

    Args:
        spec: Scenario description
        class_map: Class map of the scenario (thing classes for tracks)

    Returns:
        (ground truth, prediction) sequences in evaluation ids

    Raises:
        InvalidPlanError: If the spec is inconsistent
    """
    validate_spec(spec, class_map)
    rng = np.random.default_rng(spec.seed)
    gt_scans, pred_scans = [], []

    for frame in range(1, spec.frames + 1):
        gt_sem, gt_inst, pred_sem, pred_inst = [], [], [], []
        for track in sorted(spec.tracks, key=lambda t: t.track_id):
            if not track.first_frame <= frame <= track.last_frame:
                continue
            n = track.points_per_frame
            entry = spec.pred_plan[track.track_id][frame - track.first_frame]
            gt_sem.append(np.full(n, track.class_id))
            gt_inst.append(np.full(n, track.track_id))
            if entry == VOID:
                pred_sem.append(np.full(n, class_map.ignore_id))
                pred_inst.append(np.zeros(n, dtype=np.int64))
            elif entry == DROP:
                pred_sem.append(np.full(n, track.class_id))
                pred_inst.append(np.zeros(n, dtype=np.int64))
            else:
                pred_sem.append(np.full(n, track.class_id))
                pred_inst.append(np.full(n, int(entry)))

        background = spec.background_points
        for labels in (gt_sem, pred_sem):
            labels.append(np.full(background, BACKGROUND_CLASS))
        for labels in (gt_inst, pred_inst):
            labels.append(np.zeros(background, dtype=np.int64))

        gt = ScanLabels(semantic=np.concatenate(gt_sem), instance=np.concatenate(gt_inst))
        pred = ScanLabels(semantic=np.concatenate(pred_sem), instance=np.concatenate(pred_inst))
        order = rng.permutation(gt.point_count)
        token = frame_token(spec.sequence_id, frame)
        gt_scans.append((token, gt.permuted(order)))
        pred_scans.append((token, pred.permuted(order)))

    return (
        SequenceLabels(sequence_id=spec.sequence_id, scans=gt_scans),
        SequenceLabels(sequence_id=spec.sequence_id, scans=pred_scans),
    )


def permute_frames(pair: SequencePair, permutation: Sequence[int]) -> SequencePair:
    """
    Reorder the frames of both sequences: new frame i is old frame permutation[i].

    Args:
        pair: (ground truth, prediction) sequences
        permutation: 0-based bijection on the frame indices

    Returns:
        The permuted pair; scan tokens travel with their frames

    Raises:
        BadPermutationError: If the permutation is not a bijection
    """
    gt_seq, pred_seq = pair
    n = len(gt_seq)
    if len(pred_seq) != n or sorted(permutation) != list(range(n)):
        raise BadPermutationError(
            f"{list(permutation)} is not a permutation of the {n} frame indices"
        )
    return (
        SequenceLabels(
            sequence_id=gt_seq.sequence_id, scans=[gt_seq.scans[i] for i in permutation]
        ),
        SequenceLabels(
            sequence_id=pred_seq.sequence_id, scans=[pred_seq.scans[i] for i in permutation]
        ),
    )


# ---------------------------------------------------------------------------
# Plan operators: each returns a new spec, the ground truth is untouched
# ---------------------------------------------------------------------------


def _track(spec: ScenarioSpec, track_id: int) -> TrackSpec:
    for track in spec.tracks:
        if track.track_id == track_id:
            return track
    raise InvalidPlanError(f"Scenario has no track {track_id}")


def _check_frames(track: TrackSpec, frames: Sequence[int]) -> None:
    outside = [f for f in frames if not track.first_frame <= f <= track.last_frame]
    if outside:
        raise OutOfRangeFrameError(
            f"Frames {outside} lie outside track {track.track_id} "
            f"(frames {track.first_frame}-{track.last_frame})"
        )


def _with_plan(spec: ScenarioSpec, track_id: int, plan: List[PlanEntry]) -> ScenarioSpec:
    pred_plan = {k: list(v) for k, v in spec.pred_plan.items()}
    pred_plan[track_id] = plan
    return spec.model_copy(update={"pred_plan": pred_plan})


def _next_pred_id(spec: ScenarioSpec) -> int:
    used = [e for plan in spec.pred_plan.values() for e in plan if isinstance(e, int)]
    return max(used, default=0) + 1


def split_track(
    spec: ScenarioSpec, track_id: int, at_frame: int, new_pred_id: Optional[int] = None
) -> ScenarioSpec:
    """
    Give a track a new predicted id from `at_frame` on.

    Args:
        spec: Scenario
        track_id: Ground-truth track to split
        at_frame: First frame (1-based) carrying the new id; must follow the first frame
        new_pred_id: Id of the second part; the next unused id when omitted

    Returns:
        Updated spec
    """
    track = _track(spec, track_id)
    if not track.first_frame < at_frame <= track.last_frame:
        raise OutOfRangeFrameError(
            f"Cannot split track {track_id} (frames {track.first_frame}-{track.last_frame}) "
            f"at frame {at_frame}"
        )
    new_id = new_pred_id if new_pred_id is not None else _next_pred_id(spec)
    plan = list(spec.pred_plan[track_id])
    for frame in range(at_frame, track.last_frame + 1):
        plan[frame - track.first_frame] = new_id
    return _with_plan(spec, track_id, plan)


def transfer_id(
    spec: ScenarioSpec, source_track: int, target_track: int, from_frame: Optional[int] = None
) -> ScenarioSpec:
    """
    Let the target track inherit the source track's last predicted id.

    Args:
        spec: Scenario
        source_track: Track whose predicted id carries over
        target_track: Track that receives it
        from_frame: First frame of the target to relabel; its first frame when omitted

    Returns:
        Updated spec
    """
    source, target = _track(spec, source_track), _track(spec, target_track)
    ids = [e for e in spec.pred_plan[source_track] if isinstance(e, int)]
    if not ids:
        raise InvalidPlanError(f"Track {source_track} has no predicted id to transfer")
    start = from_frame if from_frame is not None else target.first_frame
    _check_frames(target, [start])
    plan = list(spec.pred_plan[target_track])
    for frame in range(start, target.last_frame + 1):
        plan[frame - target.first_frame] = ids[-1]
    logger.debug(f"Track {target_track} takes predicted id {ids[-1]} of track {source.track_id}")
    return _with_plan(spec, target_track, plan)


def _mark_frames(
    spec: ScenarioSpec, track_id: int, frames: Sequence[int], marker: str
) -> ScenarioSpec:
    track = _track(spec, track_id)
    _check_frames(track, frames)
    plan = list(spec.pred_plan[track_id])
    for frame in frames:
        plan[frame - track.first_frame] = marker
    return _with_plan(spec, track_id, plan)


def void_instances(spec: ScenarioSpec, track_id: int, frames: Sequence[int]) -> ScenarioSpec:
    """Predict the track's points as the ignore class on the given frames."""
    return _mark_frames(spec, track_id, frames, VOID)


def drop_instances(spec: ScenarioSpec, track_id: int, frames: Sequence[int]) -> ScenarioSpec:
    """Keep the class but remove the predicted instance on the given frames."""
    return _mark_frames(spec, track_id, frames, DROP)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def write_scenario(
    pairs: Sequence[SequencePair],
    out_dir: Union[str, Path],
    class_map: ClassMap = SCENARIO_CLASS_MAP,
) -> Path:
    """
    Write generated sequences as a dataset.

    Layout: gt/<sequence>/<token>.panoptic.bin, pred/<sequence>/<token>.panoptic.bin,
    classmap.yaml and manifest.yaml with paths relative to out_dir.

    Args:
        pairs: (ground truth, prediction) sequences
        out_dir: Output directory
        class_map: Class map of the labels

    Returns:
        Path of the manifest
    """
    out_dir = Path(out_dir)
    sequences: List[Dict] = []
    for gt_seq, pred_seq in pairs:
        scans = []
        for (token, gt), pred in zip(gt_seq.scans, pred_seq.frames):
            gt_rel = Path("gt") / gt_seq.sequence_id / f"{token}{LABEL_FILE_SUFFIX}"
            pred_rel = Path("pred") / gt_seq.sequence_id / f"{token}{LABEL_FILE_SUFFIX}"
            save_labels(out_dir / gt_rel, gt)
            save_labels(out_dir / pred_rel, pred)
            scans.append({"token": token, "gt": gt_rel.as_posix(), "pred": pred_rel.as_posix()})
        sequences.append({"sequence_id": gt_seq.sequence_id, "scans": scans})

    save_class_map(out_dir / "classmap.yaml", class_map)
    manifest_path = out_dir / "manifest.yaml"
    dump_structured(manifest_path, {"sequences": sequences})
    logger.info(f"Wrote {len(sequences)} sequences to {out_dir}")
    return manifest_path
