# /src/utils/label_io.py

"""
Label I/O Utilities Module

This module reads and writes the on-disk formats of the toolkit: packed panoptic
label files, point clouds, box files, class maps and manifests. Structured text
documents may be YAML or JSON.
"""

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, List, Tuple, Union

import numpy as np
import yaml
from pydantic import ValidationError

from constant import MAX_INSTANCE_ID, PANOPTIC_DIVISOR, POINT_DIMENSIONS
from models.box_models import Box3D
from models.config_models import Manifest
from models.exceptions import InstanceRangeError, MalformedManifestError
from models.label_models import ClassMap, ScanLabels

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


def decode_panoptic(raw: Union[int, np.ndarray]) -> Tuple[Any, Any]:
    """
    Split packed labels into class and instance ids.

    Args:
        raw: Packed value(s) class_id * 1000 + instance_id

    Returns:
        (class_id, instance_id), scalars or arrays matching the input
    """
    if isinstance(raw, np.ndarray):
        raw = raw.astype(np.int64)
        return raw // PANOPTIC_DIVISOR, raw % PANOPTIC_DIVISOR
    return int(raw) // PANOPTIC_DIVISOR, int(raw) % PANOPTIC_DIVISOR


def encode_panoptic(
    class_id: Union[int, np.ndarray], instance_id: Union[int, np.ndarray]
) -> Union[int, np.ndarray]:
    """
    Pack class and instance ids into one value per point.

    Args:
        class_id: Class id(s), >= 0
        instance_id: Instance id(s) in [0, 999]

    Returns:
        Packed value(s)

    Raises:
        InstanceRangeError: If an instance id does not fit the encoding
    """
    instances = np.asarray(instance_id, dtype=np.int64)
    if instances.size and (instances.min() < 0 or instances.max() > MAX_INSTANCE_ID):
        raise InstanceRangeError(
            f"Instance ids must lie in [0, {MAX_INSTANCE_ID}] to be packed"
        )
    if isinstance(class_id, np.ndarray) or isinstance(instance_id, np.ndarray):
        return np.asarray(class_id, dtype=np.int64) * PANOPTIC_DIVISOR + instances
    return int(class_id) * PANOPTIC_DIVISOR + int(instance_id)


def load_labels(path: PathLike) -> ScanLabels:
    """
    Load a packed label file (little-endian uint32 per point).

    Args:
        path: Path to the label file

    Returns:
        ScanLabels in the id space stored in the file
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Label file not found: {path}")
    raw = np.fromfile(path, dtype="<u4")
    semantic, instance = decode_panoptic(raw)
    return ScanLabels(semantic=semantic, instance=instance)


def save_labels(path: PathLike, labels: ScanLabels) -> None:
    """
    Write labels as a packed little-endian uint32 file.

    Args:
        path: Output path; parent directories are created
        labels: Labels to write
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    packed = encode_panoptic(labels.semantic, labels.instance)
    np.asarray(packed, dtype="<u4").tofile(path)


def load_points(path: PathLike) -> np.ndarray:
    """
    Load a point cloud of little-endian float32 (x, y, z, intensity) records.

    Args:
        path: Path to the point file

    Returns:
        Array of shape (N, 4)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Point file not found: {path}")
    flat = np.fromfile(path, dtype="<f4")
    if flat.size % POINT_DIMENSIONS:
        raise ValueError(
            f"Point file {path} holds {flat.size} floats, not a multiple of {POINT_DIMENSIONS}"
        )
    return flat.reshape(-1, POINT_DIMENSIONS)


def load_structured(path: PathLike) -> Any:
    """
    Load a YAML or JSON document.

    Args:
        path: Path ending in .yaml, .yml or .json

    Returns:
        Parsed document
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    if path.suffix in (".yml", ".yaml"):
        with open(path, "r", encoding="utf-8") as stream:
            return yaml.safe_load(stream)
    elif path.suffix == ".json":
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    raise ValueError(f"File {path} is not supported. Must be in YAML or JSON format.")


def dump_structured(path: PathLike, data: Any) -> None:
    """Write a YAML or JSON document, chosen by file suffix."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        if path.suffix == ".json":
            json.dump(data, f, indent=2, sort_keys=True)
        else:
            yaml.safe_dump(data, f, sort_keys=True)


def load_boxes(path: PathLike) -> List[Box3D]:
    """
    Load the boxes of one scan.

    Args:
        path: YAML or JSON array of Box3D records

    Returns:
        List of boxes in file order
    """
    records = load_structured(path) or []
    if not isinstance(records, list):
        raise ValueError(f"Box file {path} must contain an array of boxes")
    return [Box3D(**record) for record in records]


def save_boxes(path: PathLike, boxes: List[Box3D]) -> None:
    dump_structured(path, [box.model_dump(mode="json") for box in boxes])


def load_class_map(path: PathLike) -> ClassMap:
    """Load a class map document."""
    data = load_structured(path)
    logger.debug(f"Loaded class map {path}")
    return ClassMap(**data)


def save_class_map(path: PathLike, class_map: ClassMap) -> None:
    dump_structured(path, class_map.model_dump(exclude_none=True))


def load_manifest(path: PathLike) -> Manifest:
    """
    Load a manifest and anchor its relative paths at the manifest directory.

    Args:
        path: Manifest document path

    Returns:
        Manifest model

    Raises:
        MalformedManifestError: If the document does not fit the manifest schema
    """
    path = Path(path)
    try:
        data = load_structured(path)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise MalformedManifestError(f"Cannot parse manifest {path}: {e}") from e
    if not isinstance(data, dict):
        raise MalformedManifestError(f"Manifest {path} must be a mapping")
    data = dict(data)
    data["root"] = path.parent
    try:
        return Manifest(**data)
    except ValidationError as e:
        raise MalformedManifestError(f"Malformed manifest {path}: {e}") from e


def file_digest(path: PathLike) -> str:
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
