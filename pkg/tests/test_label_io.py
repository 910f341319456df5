from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from models.box_models import Box3D
from models.exceptions import InstanceRangeError, MalformedManifestError
from models.label_models import ClassMap, ClassMapEntry, ScanLabels
from utils.label_io import (
    decode_panoptic,
    dump_structured,
    encode_panoptic,
    file_digest,
    load_boxes,
    load_class_map,
    load_labels,
    load_manifest,
    load_points,
    save_boxes,
    save_class_map,
    save_labels,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


class TestPackedEncoding:
    def test_scalar(self):
        assert encode_panoptic(3, 42) == 3042
        assert decode_panoptic(3042) == (3, 42)
        assert decode_panoptic(encode_panoptic(255, 0)) == (255, 0)

    def test_vectorized(self):
        classes = np.array([0, 7, 255, 15])
        instances = np.array([999, 0, 0, 12])
        packed = encode_panoptic(classes, instances)
        np.testing.assert_array_equal(packed, [999, 7000, 255000, 15012])
        decoded_classes, decoded_instances = decode_panoptic(packed)
        np.testing.assert_array_equal(decoded_classes, classes)
        np.testing.assert_array_equal(decoded_instances, instances)

    def test_instance_out_of_range(self):
        with pytest.raises(InstanceRangeError):
            encode_panoptic(1, 1000)
        with pytest.raises(InstanceRangeError):
            encode_panoptic(np.array([1, 1]), np.array([3, -1]))


class TestLabelFiles:
    def test_binary_roundtrip_is_bit_identical(self, tmp_path, rng):
        labels = ScanLabels(
            semantic=rng.integers(0, 17, size=500), instance=rng.integers(0, 1000, size=500)
        )
        path = tmp_path / "scans" / "tok.panoptic.bin"
        save_labels(path, labels)

        assert path.stat().st_size == 4 * 500
        raw = np.fromfile(path, dtype="<u4")
        np.testing.assert_array_equal(raw, labels.semantic * 1000 + labels.instance)
        loaded = load_labels(path)
        np.testing.assert_array_equal(loaded.semantic, labels.semantic)
        np.testing.assert_array_equal(loaded.instance, labels.instance)

    def test_missing_label_file(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="nope.panoptic.bin"):
            load_labels(tmp_path / "nope.panoptic.bin")

    def test_points(self, tmp_path):
        cloud = np.arange(12, dtype="<f4")
        cloud.tofile(tmp_path / "a.bin")
        points = load_points(tmp_path / "a.bin")
        assert points.shape == (3, 4)
        assert points[2, 0] == 8.0

        np.arange(6, dtype="<f4").tofile(tmp_path / "b.bin")
        with pytest.raises(ValueError, match="multiple of 4"):
            load_points(tmp_path / "b.bin")


class TestStructuredDocuments:
    def test_boxes_roundtrip(self, tmp_path):
        boxes = [
            Box3D(center=(1.0, 2.0, 0.5), size=(2.0, 4.0, 1.5), yaw=0.3, class_id=3, track_id="a"),
            Box3D(center=(0.0, 0.0, 0.0), size=(1.0, 1.0, 1.0), class_id=6, score=0.4),
        ]
        save_boxes(tmp_path / "boxes.json", boxes)
        assert load_boxes(tmp_path / "boxes.json") == boxes

    def test_boxes_must_be_a_list(self, tmp_path):
        dump_structured(tmp_path / "boxes.yaml", {"center": [0, 0, 0]})
        with pytest.raises(ValueError, match="array of boxes"):
            load_boxes(tmp_path / "boxes.yaml")

    def test_unsupported_suffix(self, tmp_path):
        (tmp_path / "map.txt").write_text("entries: []")
        with pytest.raises(ValueError, match="YAML or JSON"):
            load_class_map(tmp_path / "map.txt")

    def test_manifest_paths_resolve_against_manifest_dir(self, tmp_path):
        dump_structured(
            tmp_path / "data" / "manifest.yaml",
            {"sequences": [{"sequence_id": "s", "scans": [{"token": "t", "gt": "gt/t.bin"}]}]},
        )
        manifest = load_manifest(tmp_path / "data" / "manifest.yaml")
        scan = manifest.sequences[0].scans[0]
        assert manifest.resolve(scan.gt) == tmp_path / "data" / "gt" / "t.bin"
        assert manifest.resolve(scan.pred) is None
        assert manifest.scan_count == 1

    @pytest.mark.parametrize(
        "document",
        [
            ["not", "a", "mapping"],
            {"scans": []},
            {"sequences": [{"sequence_id": "s", "scans": [{"token": "t"}, {"token": "t"}]}]},
            {"sequences": [{"sequence_id": "s"}, {"sequence_id": "s"}]},
        ],
    )
    def test_malformed_manifest(self, tmp_path, document):
        dump_structured(tmp_path / "manifest.json", document)
        with pytest.raises(MalformedManifestError):
            load_manifest(tmp_path / "manifest.json")

    def test_file_digest_tracks_content(self, tmp_path):
        (tmp_path / "a").write_bytes(b"abc")
        (tmp_path / "b").write_bytes(b"abc")
        (tmp_path / "c").write_bytes(b"abd")
        assert file_digest(tmp_path / "a") == file_digest(tmp_path / "b")
        assert file_digest(tmp_path / "a") != file_digest(tmp_path / "c")


class TestClassMap:
    def test_shipped_nuscenes_map(self):
        class_map = load_class_map(CONFIGS / "classmap_panoptic_nuscenes.yaml")
        assert class_map.num_eval_classes == 16
        assert class_map.ignore_id == 255
        assert len(class_map.entries) == 32
        assert len(class_map.thing_ids) == 10
        assert len(class_map.stuff_ids) == 6
        assert class_map.lookup[15] == class_map.lookup[16] == 2
        assert {int(class_map.lookup[r]) for r in (2, 3, 4, 6)} == {6}
        assert class_map.eval_name(2) == "bus"
        assert class_map.eval_name(255) == "void"

    def test_save_and_load(self, tmp_path, class_map):
        save_class_map(tmp_path / "classmap.yaml", class_map)
        loaded = load_class_map(tmp_path / "classmap.yaml")
        assert loaded.thing_ids == class_map.thing_ids
        np.testing.assert_array_equal(loaded.lookup, class_map.lookup)

    def test_identity_over_eval(self):
        class_map = load_class_map(CONFIGS / "classmap_panoptic_nuscenes.yaml")
        identity = class_map.identity_over_eval()
        assert identity.eval_names == class_map.eval_names
        assert identity.thing_ids == class_map.thing_ids
        assert all(identity.lookup[c] == c for c in range(16))
        assert identity.lookup[255] == 255

    def test_thing_and_ignore_are_exclusive(self):
        with pytest.raises(ValidationError):
            ClassMapEntry(raw_id=0, eval_id=255, name="x", is_thing=True, is_ignore=True)

    def test_ignore_id_outside_eval_range(self):
        with pytest.raises(ValidationError, match="collides"):
            ClassMap(
                entries=[ClassMapEntry(raw_id=0, eval_id=0, name="road")],
                num_eval_classes=2,
                ignore_id=1,
            )

    def test_every_eval_id_needs_an_entry(self):
        with pytest.raises(ValidationError, match="no class map entry"):
            ClassMap(
                entries=[ClassMapEntry(raw_id=0, eval_id=0, name="road")],
                num_eval_classes=2,
            )

    def test_thing_flag_must_agree(self):
        with pytest.raises(ValidationError, match="both thing and stuff"):
            ClassMap(
                entries=[
                    ClassMapEntry(raw_id=0, eval_id=0, name="car", is_thing=True),
                    ClassMapEntry(raw_id=1, eval_id=0, name="car"),
                ],
                num_eval_classes=1,
            )


class TestScanLabels:
    def test_lengths_must_agree(self):
        with pytest.raises(ValidationError, match="points"):
            ScanLabels(semantic=[0, 1, 2], instance=[0, 0])

    def test_instance_range(self):
        with pytest.raises(ValidationError, match="Instance ids"):
            ScanLabels(semantic=[0], instance=[1000])

    def test_arrays_are_read_only(self):
        labels = ScanLabels(semantic=[0, 1], instance=[0, 0])
        with pytest.raises(ValueError):
            labels.semantic[0] = 5
