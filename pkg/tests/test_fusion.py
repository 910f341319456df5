import math

import numpy as np
import pytest

import oracles
from eval.panoptic_evaluate import PQStats, finalize, match_scan_pair
from fusion import (
    TrackIdRegistry,
    box_rotation,
    fuse_gt,
    fuse_pred,
    overlap_noise_statistics,
    points_in_box,
    select_boxes,
    select_max_f1_thresholds,
)
from helpers import CAR, IGNORE, PEDESTRIAN, VEGETATION, scan
from models.box_models import Box3D
from models.config_models import FusionConfig
from models.exceptions import InstanceRangeError, LengthMismatchError


def box(center, size=(2.0, 2.0, 2.0), yaw=0.0, class_id=CAR, score=1.0, track_id=None):
    return Box3D(
        center=center, size=size, yaw=yaw, class_id=class_id, score=score, track_id=track_id
    )


def random_boxes(rng, count, track=True):
    return [
        box(
            center=tuple(rng.uniform(-3, 3, size=3)),
            size=tuple(rng.uniform(1.0, 4.0, size=3)),
            yaw=float(rng.uniform(-math.pi, math.pi)),
            class_id=int(rng.choice([CAR, PEDESTRIAN])),
            track_id=f"t{i}" if track else None,
        )
        for i in range(count)
    ]


class TestPointsInBox:
    def test_faces_are_inside(self):
        points = np.array([[1.0, 2.0, 1.0], [1.01, 0.0, 0.0], [-1.0, -2.0, -1.0], [0.0, 0.0, 0.0]])
        inside = points_in_box(points, box((0.0, 0.0, 0.0), size=(2.0, 4.0, 2.0)))
        assert inside.tolist() == [0, 2, 3]

    def test_yaw_turns_the_long_axis(self):
        points = np.array([[1.2, 0.0, 0.0], [0.0, 1.2, 0.0]])
        rotated = box((0.0, 0.0, 0.0), size=(1.0, 3.0, 1.0), yaw=math.pi / 2)
        assert points_in_box(points, rotated).tolist() == [0]
        straight = box((0.0, 0.0, 0.0), size=(1.0, 3.0, 1.0))
        assert points_in_box(points, straight).tolist() == [1]

    def test_rotation_consistency(self, rng):
        points = rng.uniform(-5, 5, size=(400, 4))
        for candidate in random_boxes(rng, 10):
            theta = float(rng.uniform(-math.pi, math.pi))
            turn = box_rotation(theta)
            moved_points = points[:, :3] @ turn.T
            moved_box = candidate.model_copy(
                update={
                    "center": tuple(turn @ np.asarray(candidate.center)),
                    "yaw": candidate.yaw + theta,
                }
            )
            expected = points_in_box(points, candidate)
            assert points_in_box(moved_points, moved_box, tolerance=1e-7).tolist() == expected.tolist()

    def test_matches_brute_force(self, rng):
        points = rng.uniform(-5, 5, size=(300, 4))
        for candidate in random_boxes(rng, 10):
            expected = oracles.points_in_box(points, candidate.center, candidate.size, candidate.yaw)
            assert set(points_in_box(points, candidate).tolist()) == expected


class TestTrackIdRegistry:
    def test_first_seen_order(self):
        registry = TrackIdRegistry()
        assert [registry.register(t) for t in ["b", 7, "b", "a"]] == [1, 2, 1, 3]
        assert "a" in registry and len(registry) == 3

    def test_overflow(self):
        registry = TrackIdRegistry()
        for i in range(999):
            registry.register(i)
        with pytest.raises(InstanceRangeError):
            registry.register("one too many")
        with pytest.raises(InstanceRangeError):
            registry.untracked_id(set())

    def test_untracked_ids_skip_tracked_and_used_ids(self):
        registry = TrackIdRegistry()
        registry.register("a")
        assert registry.untracked_id({2}) == 3
        assert registry.register("b") == 2
        assert registry.assigned == {1, 2}


class TestFuseGt:
    def test_noise_matches_brute_force(self, class_map, rng):
        for _ in range(10):
            points = rng.uniform(-4, 4, size=(250, 4))
            semantic = rng.choice([CAR, PEDESTRIAN, VEGETATION], size=250)
            labels = scan(semantic, np.zeros(250, dtype=np.int64))
            boxes = random_boxes(rng, 6)

            fused = fuse_gt(labels, points, boxes, class_map)
            noise = set(np.flatnonzero(fused.semantic == IGNORE).tolist())
            assert noise == oracles.overlap_noise(points, semantic, boxes)
            assert not fused.instance[sorted(noise)].any()
            assert not fused.instance[semantic == VEGETATION].any()

    def test_single_box_points_take_the_track(self, class_map):
        points = np.array([[0.0, 0.0, 0.0], [0.5, 0.0, 0.0], [10.0, 0.0, 0.0], [0.2, 0.0, 0.0]])
        labels = scan([CAR, CAR, CAR, PEDESTRIAN], [0, 0, 0, 0])
        registry = TrackIdRegistry()
        registry.register("earlier")
        fused = fuse_gt(labels, points, [box((0.0, 0.0, 0.0), track_id="x")], class_map, registry)
        # the pedestrian point is inside the car box but keeps its own class
        assert fused.semantic.tolist() == [CAR, CAR, CAR, PEDESTRIAN]
        assert fused.instance.tolist() == [2, 2, 0, 0]

    def test_independent_of_box_order(self, class_map, rng):
        points = rng.uniform(-4, 4, size=(200, 4))
        labels = scan(rng.choice([CAR, PEDESTRIAN], size=200), np.zeros(200, dtype=np.int64))
        boxes = random_boxes(rng, 8)
        first = fuse_gt(labels, points, boxes, class_map)
        second = fuse_gt(labels, points, boxes[::-1], class_map)
        np.testing.assert_array_equal(first.semantic, second.semantic)
        np.testing.assert_array_equal(first.instance, second.instance)

    def test_requires_track_ids(self, class_map):
        labels = scan([CAR], [0])
        with pytest.raises(ValueError, match="track id"):
            fuse_gt(labels, np.zeros((1, 4)), [box((0.0, 0.0, 0.0))], class_map)

    def test_point_count_must_agree(self, class_map):
        with pytest.raises(LengthMismatchError):
            fuse_gt(scan([CAR, CAR], [0, 0]), np.zeros((3, 4)), [], class_map)

    def test_overlap_noise_statistics(self, class_map):
        points = np.array([[0.0, 0.0, 0.0], [0.9, 0.0, 0.0], [-0.9, 0.0, 0.0], [5.0, 0.0, 0.0]])
        labels = scan([CAR, CAR, CAR, PEDESTRIAN], [0, 0, 0, 0])
        boxes = [box((0.5, 0.0, 0.0), track_id=1), box((-0.5, 0.0, 0.0), track_id=2)]
        fused = fuse_gt(labels, points, boxes, class_map)
        table = overlap_noise_statistics([(labels, fused)], class_map)
        car = table[table["name"] == "car"].iloc[0]
        assert (car["points"], car["noise_points"]) == (3, 1)
        assert car["noise_percent"] == pytest.approx(33.33)
        pedestrian = table[table["name"] == "pedestrian"].iloc[0]
        assert pedestrian["noise_percent"] == 0.0


class TestFusePred:
    def test_overlap_goes_to_the_higher_score(self, class_map):
        points = np.array([[0.0, 0.0, 0.0], [0.9, 0.0, 0.0], [-0.9, 0.0, 0.0], [5.0, 0.0, 0.0]])
        semantic = scan([VEGETATION] * 4, [0] * 4)
        boxes = [
            box((0.5, 0.0, 0.0), score=0.4),
            box((-0.5, 0.0, 0.0), class_id=PEDESTRIAN, score=0.8),
        ]
        fused = fuse_pred(semantic, points, boxes, class_map)
        assert fused.semantic.tolist() == [PEDESTRIAN, CAR, PEDESTRIAN, VEGETATION]
        assert fused.instance.tolist() == [1, 2, 1, 0]

    def test_volume_then_input_order_break_ties(self, class_map):
        points = np.zeros((1, 4))
        semantic = scan([VEGETATION], [0])
        small = box((0.0, 0.0, 0.0), size=(1.0, 1.0, 1.0), class_id=PEDESTRIAN)
        large = box((0.0, 0.0, 0.0), size=(2.0, 2.0, 2.0), class_id=CAR)
        assert fuse_pred(semantic, points, [small, large], class_map).semantic.tolist() == [CAR]
        twin = box((0.0, 0.0, 0.0), size=(1.0, 1.0, 1.0), class_id=CAR)
        assert fuse_pred(semantic, points, [small, twin], class_map).semantic.tolist() == [PEDESTRIAN]

    def test_one_instance_per_box(self, class_map, rng):
        points = rng.uniform(-4, 4, size=(300, 4))
        semantic = scan([VEGETATION] * 300, [0] * 300)
        boxes = random_boxes(rng, 6, track=False)
        fused = fuse_pred(semantic, points, boxes, class_map)
        ids = set(fused.instance[fused.instance > 0].tolist())
        assert ids <= set(range(1, len(boxes) + 1))
        for instance_id in ids:
            assert len(set(fused.semantic[fused.instance == instance_id].tolist())) == 1

    def test_tracked_and_untracked_ids_do_not_collide(self, class_map):
        points = np.array([[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]])
        semantic = scan([VEGETATION, VEGETATION], [0, 0])
        boxes = [box((0.0, 0.0, 0.0), track_id="a"), box((10.0, 0.0, 0.0))]
        fused = fuse_pred(semantic, points, boxes, class_map)
        assert fused.instance.tolist() == [1, 2]

    def test_untracked_ids_avoid_tracks_of_earlier_scans(self, class_map):
        registry = TrackIdRegistry()
        points = np.zeros((1, 4))
        semantic = scan([VEGETATION], [0])
        first = fuse_pred(semantic, points, [box((0.0, 0.0, 0.0), track_id="a")], class_map, registry)
        second = fuse_pred(semantic, points, [box((0.0, 0.0, 0.0))], class_map, registry)
        assert first.instance.tolist() == [1]
        assert second.instance.tolist() == [2]

    def test_later_tracks_avoid_earlier_untracked_ids(self, class_map):
        registry = TrackIdRegistry()
        points = np.zeros((1, 4))
        semantic = scan([VEGETATION], [0])
        first = fuse_pred(semantic, points, [box((0.0, 0.0, 0.0))], class_map, registry)
        second = fuse_pred(semantic, points, [box((0.0, 0.0, 0.0), track_id="a")], class_map, registry)
        assert first.instance.tolist() == [1]
        assert second.instance.tolist() == [2]
        assert registry.assigned == {2}

    def test_stuff_boxes_are_skipped(self, class_map):
        fused = fuse_pred(
            scan([CAR], [0]), np.zeros((1, 4)), [box((0.0, 0.0, 0.0), class_id=VEGETATION)], class_map
        )
        assert fused.semantic.tolist() == [CAR]
        assert fused.instance.tolist() == [0]


class TestThresholds:
    def test_select_boxes(self):
        boxes = [box((0.0, 0.0, 0.0), score=s, class_id=c) for s, c in [(0.2, CAR), (0.5, CAR), (0.4, PEDESTRIAN)]]
        assert len(select_boxes(boxes, FusionConfig(mode="pred"))) == 3
        fixed = FusionConfig(mode="pred", threshold_mode="fixed", score_threshold=0.45)
        assert [b.score for b in select_boxes(boxes, fixed)] == [0.5]
        per_class = FusionConfig(
            mode="pred", threshold_mode="per-class", class_thresholds={CAR: 0.1, PEDESTRIAN: 0.9}
        )
        assert [b.score for b in select_boxes(boxes, per_class)] == [0.2, 0.5]
        max_f1 = FusionConfig(mode="pred", threshold_mode="max-f1")
        assert [b.score for b in select_boxes(boxes, max_f1, {CAR: 0.3})] == [0.5, 0.4]

    def test_class_thresholds_in_unit_range(self):
        with pytest.raises(ValueError):
            FusionConfig(mode="pred", class_thresholds={CAR: 1.5})

    def test_max_f1_threshold(self):
        annotations = [[box((0.0, 0.0, 0.0)), box((10.0, 0.0, 0.0))]]
        detections = [
            [
                box((0.5, 0.0, 0.0), score=0.9),
                box((10.0, 1.0, 0.0), score=0.6),
                box((30.0, 0.0, 0.0), score=0.3),
            ]
        ]
        assert select_max_f1_thresholds(detections, annotations) == {CAR: 0.6}

    def test_max_f1_needs_aligned_scans(self):
        with pytest.raises(LengthMismatchError):
            select_max_f1_thresholds([[], []], [[]])


def detection_suite(rng, objects=8, spurious=5):
    """Cars on a row with background points, their perfect semantics and detections."""
    points, semantic, annotations, detections = [], [], [], []
    for k in range(objects):
        center = (6.0 * k, 0.0, 0.0)
        points.append(rng.uniform(-0.9, 0.9, size=(30, 3)) + np.asarray(center))
        semantic += [CAR] * 30
        annotations.append(box(center, track_id=k))
        detections.append(box(center, score=float(rng.uniform(0.05, 1.0))))
    ground = np.column_stack(
        [rng.uniform(0, 6.0 * objects, 100), rng.uniform(5, 10, 100), np.full(100, -3.0)]
    )
    points.append(ground)
    semantic += [VEGETATION] * 100
    for j in range(spurious):
        detections.append(box((200.0 + 5 * j, 200.0, 0.0), score=float(rng.uniform(0.05, 0.3))))
    cloud = np.column_stack([np.vstack(points), np.zeros(len(semantic))])
    labels = scan(semantic, np.zeros(len(semantic), dtype=np.int64))
    return cloud, labels, annotations, detections


def test_unfiltered_detections_score_best(class_map, exact_config):
    rng = np.random.default_rng(4)
    suite = [detection_suite(rng) for _ in range(5)]
    gt = [fuse_gt(labels, cloud, annotations, class_map) for cloud, labels, annotations, _ in suite]

    def pq_at(threshold):
        config = FusionConfig(
            mode="pred", threshold_mode="fixed" if threshold else "none", score_threshold=threshold
        )
        stats = PQStats(class_map.num_eval_classes)
        for (cloud, labels, _, detections), gt_scan in zip(suite, gt):
            pred = fuse_pred(labels, cloud, select_boxes(detections, config), class_map)
            stats.add(match_scan_pair(gt_scan, pred, class_map, exact_config))
        return finalize(stats, class_map).pq

    unfiltered = pq_at(0.0)
    assert unfiltered == pytest.approx(1.0)
    for threshold in (0.2, 0.4, 0.6, 0.8):
        assert unfiltered >= pq_at(threshold)
    assert pq_at(0.8) < unfiltered
