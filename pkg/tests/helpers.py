"""
Builders for small synthetic label data shared by the test modules.
"""

from typing import List, Sequence, Tuple

import numpy as np

from models.label_models import ScanLabels, SequenceLabels

CAR, PEDESTRIAN, VEGETATION, IGNORE = 0, 1, 2, 255


def scan(semantic: Sequence[int], instance: Sequence[int]) -> ScanLabels:
    return ScanLabels(semantic=np.asarray(semantic), instance=np.asarray(instance))


def sequence(sequence_id: str, scans: Sequence[ScanLabels]) -> SequenceLabels:
    return SequenceLabels(
        sequence_id=sequence_id,
        scans=[(f"{sequence_id}_{i:03d}", s) for i, s in enumerate(scans)],
    )


def random_sequence_pair(
    seed: int,
    max_frames: int = 5,
    max_points: int = 30,
    max_tracks: int = 4,
    sequence_id: str = "random",
) -> Tuple[SequenceLabels, SequenceLabels]:
    """
    A random gt/pred sequence pair on the scenario class map.

    Instance ids are numbered per class on both sides, so a car and a
    pedestrian regularly share an instance id while every (class, instance)
    pair names one object. Predictions start from the ground truth with
    relabelled ids, switch to an alternative id on some frames and then have a
    share of their points overwritten by random labels.
    """
    rng = np.random.default_rng(seed)
    frames = int(rng.integers(1, max_frames + 1))
    tracks = int(rng.integers(0, max_tracks + 1))
    track_class = rng.choice([CAR, PEDESTRIAN], size=tracks)
    gt_instance = np.zeros(tracks, dtype=np.int64)
    primary = np.zeros(tracks, dtype=np.int64)
    alternative = np.zeros(tracks, dtype=np.int64)
    for class_id in (CAR, PEDESTRIAN):
        members = np.flatnonzero(track_class == class_id)
        gt_instance[members] = np.arange(1, members.size + 1)
        ids = rng.choice(np.arange(1, 2 * tracks + 2), size=2 * members.size, replace=False)
        primary[members], alternative[members] = ids[: members.size], ids[members.size :]
    spurious_class = int(rng.choice([CAR, PEDESTRIAN]))
    spurious = int(rng.integers(1, 2 * tracks + 2))

    gt_pool: List[Tuple[int, int]] = [(VEGETATION, 0), (IGNORE, 0), (CAR, 0)]
    gt_pool += [(int(track_class[k]), int(gt_instance[k])) for k in range(tracks)]
    pred_pool: List[Tuple[int, int]] = [(VEGETATION, 0), (IGNORE, 0), (PEDESTRIAN, 0)]
    pred_pool += [(int(track_class[k]), int(primary[k])) for k in range(tracks)]
    pred_pool += [(int(track_class[k]), int(alternative[k])) for k in range(tracks)]
    pred_pool.append((spurious_class, spurious))
    first_track = 3

    gt_scans, pred_scans = [], []
    for _ in range(frames):
        n = int(rng.integers(1, max_points + 1))
        choice = rng.integers(len(gt_pool), size=n)
        gt_sem = np.array([gt_pool[c][0] for c in choice])
        gt_inst = np.array([gt_pool[c][1] for c in choice])

        switched = rng.random(tracks) < 0.3
        pred_sem = gt_sem.copy()
        pred_inst = np.zeros(n, dtype=np.int64)
        for k in range(tracks):
            of_track = choice == first_track + k
            pred_inst[of_track] = alternative[k] if switched[k] else primary[k]

        noisy = np.flatnonzero(rng.random(n) < 0.25)
        for i in noisy:
            pred_sem[i], pred_inst[i] = pred_pool[int(rng.integers(len(pred_pool)))]

        gt_scans.append(scan(gt_sem, gt_inst))
        pred_scans.append(scan(pred_sem, pred_inst))

    return sequence(sequence_id, gt_scans), sequence(sequence_id, pred_scans)
