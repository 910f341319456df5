from pathlib import Path

import numpy as np
import pytest

from helpers import CAR, IGNORE, PEDESTRIAN, VEGETATION, scan
from models.exceptions import UnknownRawClassError
from utils.label_io import load_class_map
from utils.label_utils import (
    extract_segments,
    filter_min_points,
    instance_void_mask,
    remap,
    small_instance_mask,
)

NUSCENES_MAP = Path(__file__).resolve().parents[1] / "configs" / "classmap_panoptic_nuscenes.yaml"


class TestRemap:
    def test_raw_to_eval(self):
        class_map = load_class_map(NUSCENES_MAP)
        raw = scan([15, 16, 2, 0, 24, 17], [4, 5, 6, 3, 9, 7])
        remapped = remap(raw, class_map)
        np.testing.assert_array_equal(remapped.semantic, [2, 2, 6, 255, 10, 3])
        # instances survive on things only
        np.testing.assert_array_equal(remapped.instance, [4, 5, 6, 0, 0, 7])

    def test_unknown_raw_class(self):
        class_map = load_class_map(NUSCENES_MAP)
        with pytest.raises(UnknownRawClassError) as error:
            remap(scan([17, 40], [0, 0]), class_map, source="scan_7")
        assert error.value.raw_id == 40
        assert "scan_7" in str(error.value)

    def test_idempotent_on_identity_map(self, class_map):
        labels = scan([CAR, CAR, VEGETATION, IGNORE, PEDESTRIAN], [1, 1, 0, 0, 2])
        identity = class_map.identity_over_eval()
        once = remap(labels, identity)
        twice = remap(once, identity)
        np.testing.assert_array_equal(once.semantic, twice.semantic)
        np.testing.assert_array_equal(once.instance, twice.instance)
        np.testing.assert_array_equal(once.semantic, labels.semantic)


class TestSegments:
    def test_extract_segments(self, class_map):
        labels = scan(
            [CAR, PEDESTRIAN, CAR, VEGETATION, CAR, IGNORE, CAR],
            [2, 1, 2, 0, 1, 0, 0],
        )
        segments = extract_segments(labels, class_map)
        assert [(s.class_id, s.instance_id) for s in segments] == [(0, 1), (0, 2), (1, 1)]
        assert segments[1].point_indices.tolist() == [0, 2]

    def test_point_partition(self, class_map, rng):
        semantic = rng.choice([CAR, PEDESTRIAN, VEGETATION, IGNORE], size=300)
        instance = np.where(np.isin(semantic, [CAR, PEDESTRIAN]), rng.integers(1, 6, size=300), 0)
        labels = scan(semantic, instance)
        segment_points = sum(s.size for s in extract_segments(labels, class_map))
        stuff = int(np.sum(semantic == VEGETATION))
        ignored = int(np.sum(semantic == IGNORE))
        assert segment_points + stuff + ignored == labels.point_count

    def test_filter_is_strict(self, class_map):
        labels = scan([CAR] * 31, [1] * 15 + [2] * 16)
        segments = extract_segments(labels, class_map)
        kept = filter_min_points(segments, 15)
        assert [s.instance_id for s in kept] == [2]
        assert len(filter_min_points(segments, 0)) == 2
        with pytest.raises(ValueError):
            filter_min_points(segments, -1)

    def test_small_instance_mask(self, class_map):
        labels = scan([CAR, CAR, CAR, PEDESTRIAN, VEGETATION], [1, 1, 2, 2, 0])
        np.testing.assert_array_equal(
            small_instance_mask(labels, class_map, 1), [False, False, True, True, False]
        )
        assert not small_instance_mask(labels, class_map, 0).any()

    def test_instance_void_mask(self, class_map):
        labels = scan([CAR, CAR, CAR, IGNORE, VEGETATION, PEDESTRIAN], [1, 1, 0, 0, 0, 3])
        np.testing.assert_array_equal(
            instance_void_mask(labels, class_map, None), [False, False, True, True, False, False]
        )
        np.testing.assert_array_equal(
            instance_void_mask(labels, class_map, 1), [False, False, True, True, False, True]
        )
