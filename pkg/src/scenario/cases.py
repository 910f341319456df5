# /src/scenario/cases.py

"""
Tracking Case Presets Module

Ready-made scenarios for the four adversarial tracking cases on a seven-scan
sequence with perfect segmentation:

1. frame permutation: a consecutive a/b split versus an alternating one
2. ID transfer: two consecutive objects predicted with one id
3. long-term consistency: moving the split point of a two-id track
4. void robustness: wrong-id frames versus the same frames voided

Each preset returns the (ground truth, prediction) pairs to compare, one
sequence per variant.
"""

from typing import Callable, Dict, List, Tuple

from models.label_models import SequenceLabels
from models.scenario_models import ScenarioSpec, TrackSpec
from scenario.scenario_generator import (
    generate,
    permute_frames,
    split_track,
    transfer_id,
    void_instances,
)

SequencePair = Tuple[SequenceLabels, SequenceLabels]

CASE_FRAMES = 7
# Interleaves a 3+4 split into b, a, b, a, b, a, b
ALTERNATING_ORDER = [3, 0, 4, 1, 5, 2, 6]


def single_track_spec(
    sequence_id: str = "single_track",
    frames: int = CASE_FRAMES,
    points_per_frame: int = 20,
    background_points: int = 10,
    seed: int = 0,
) -> ScenarioSpec:
    """One car present on every frame, predicted perfectly with id 1."""
    return ScenarioSpec(
        sequence_id=sequence_id,
        frames=frames,
        tracks=[
            TrackSpec(
                track_id=1,
                first_frame=1,
                last_frame=frames,
                points_per_frame=points_per_frame,
            )
        ],
        pred_plan={1: [1] * frames},
        background_points=background_points,
        seed=seed,
    )


def case1_pair(background_points: int = 10) -> List[SequencePair]:
    """Split a(3) b(4) in consecutive order, and the same frames alternating."""
    spec = split_track(single_track_spec("case1_consecutive", background_points=background_points), 1, 4)
    consecutive = generate(spec)
    gt, pred = permute_frames(consecutive, ALTERNATING_ORDER)
    alternating = (
        SequenceLabels(sequence_id="case1_alternating", scans=gt.scans),
        SequenceLabels(sequence_id="case1_alternating", scans=pred.scans),
    )
    return [consecutive, alternating]


def case2_spec(background_points: int = 10) -> ScenarioSpec:
    """Track A on frames 1-3, track B on frames 4-7, both predicted as id 1."""
    spec = ScenarioSpec(
        sequence_id="case2_transfer",
        frames=CASE_FRAMES,
        tracks=[
            TrackSpec(track_id=1, first_frame=1, last_frame=3),
            TrackSpec(track_id=2, first_frame=4, last_frame=CASE_FRAMES),
        ],
        pred_plan={1: [1, 1, 1], 2: [2, 2, 2, 2]},
        background_points=background_points,
    )
    return transfer_id(spec, source_track=1, target_track=2)


def case2_transfer(background_points: int = 10) -> List[SequencePair]:
    return [generate(case2_spec(background_points))]


def case3_split(background_points: int = 10) -> List[SequencePair]:
    """a(3) b(4) against a(2) b(5): the dominant sub-track grows by one frame."""
    pairs = []
    for at_frame, name in ((4, "case3_a3b4"), (3, "case3_a2b5")):
        spec = single_track_spec(name, background_points=background_points)
        pairs.append(generate(split_track(spec, 1, at_frame)))
    return pairs


def case4_specs(background_points: int = 10) -> Tuple[ScenarioSpec, ScenarioSpec]:
    """a(4) b(3) with wrong ids on frames 5-7, and the same frames voided."""
    wrong = split_track(single_track_spec("case4_wrong_ids", background_points=background_points), 1, 5)
    voided = void_instances(
        single_track_spec("case4_voided", background_points=background_points), 1, [5, 6, 7]
    )
    return wrong, voided


def case4_void(background_points: int = 10) -> List[SequencePair]:
    return [generate(spec) for spec in case4_specs(background_points)]


CASES: Dict[str, Callable[..., List[SequencePair]]] = {
    "case1": case1_pair,
    "case2": case2_transfer,
    "case3": case3_split,
    "case4": case4_void,
}
