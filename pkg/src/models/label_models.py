# /src/models/label_models.py

"""
Label Models

This module defines the pydantic models for the per-point label data shared by
every metric engine: the raw-to-evaluation class map, per-scan labels, labelled
sequences and materialized instance segments.
"""

from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    field_validator,
    model_validator,
)

from constant import DEFAULT_IGNORE_ID, MAX_INSTANCE_ID


class ClassMapEntry(BaseModel):
    """One row of the class map: a raw class and its evaluation class."""

    raw_id: int = Field(..., ge=0, description="Class id as stored in label files")
    eval_id: int = Field(..., ge=0, description="Evaluation class id (or the ignore id)")
    name: str = Field(..., description="Name of the evaluation class")
    raw_name: Optional[str] = Field(None, description="Name of the raw class")
    is_thing: bool = Field(False, description="Whether the evaluation class has instances")
    is_ignore: bool = Field(False, description="Whether the raw class is mapped to void")

    @model_validator(mode="after")
    def thing_and_ignore_are_exclusive(self) -> "ClassMapEntry":
        if self.is_thing and self.is_ignore:
            raise ValueError(
                f"Raw class {self.raw_id} cannot be both a thing and ignored"
            )
        return self


class ClassMap(BaseModel):
    """Raw-to-evaluation class remapping with thing/stuff/ignore flags."""

    entries: List[ClassMapEntry] = Field(..., description="Class map rows")
    num_eval_classes: int = Field(..., gt=0, description="Number of evaluation classes")
    ignore_id: int = Field(
        DEFAULT_IGNORE_ID, ge=0, description="Distinguished evaluation id for void points"
    )

    _lookup: np.ndarray = PrivateAttr()
    _thing_lut: np.ndarray = PrivateAttr()
    _names: Dict[int, str] = PrivateAttr()

    @model_validator(mode="after")
    def validate_entries(self) -> "ClassMap":
        """Check the class map invariants and build the lookup tables."""
        if self.ignore_id < self.num_eval_classes:
            raise ValueError(
                f"ignore_id {self.ignore_id} collides with the eval range [0, {self.num_eval_classes})"
            )

        seen_raw = set()
        thing_flags: Dict[int, bool] = {}
        names: Dict[int, str] = {}
        for entry in self.entries:
            if entry.raw_id in seen_raw:
                raise ValueError(f"Raw class {entry.raw_id} is mapped more than once")
            seen_raw.add(entry.raw_id)

            if entry.is_ignore:
                if entry.eval_id != self.ignore_id:
                    raise ValueError(
                        f"Ignored raw class {entry.raw_id} must map to ignore id {self.ignore_id}"
                    )
                continue
            if entry.eval_id >= self.num_eval_classes:
                raise ValueError(
                    f"Raw class {entry.raw_id} maps to eval id {entry.eval_id} outside [0, {self.num_eval_classes})"
                )
            previous = thing_flags.setdefault(entry.eval_id, entry.is_thing)
            if previous != entry.is_thing:
                raise ValueError(
                    f"Eval class {entry.eval_id} is flagged both thing and stuff"
                )
            names.setdefault(entry.eval_id, entry.name)

        missing = sorted(set(range(self.num_eval_classes)) - set(thing_flags))
        if missing:
            raise ValueError(f"Eval ids {missing} have no class map entry")

        lookup = np.full(max(seen_raw) + 1, -1, dtype=np.int64)
        for entry in self.entries:
            lookup[entry.raw_id] = entry.eval_id
        self._lookup = lookup

        thing_lut = np.zeros(max(self.num_eval_classes, self.ignore_id) + 1, dtype=bool)
        for eval_id, is_thing in thing_flags.items():
            thing_lut[eval_id] = is_thing
        self._thing_lut = thing_lut
        self._names = names
        return self

    @property
    def lookup(self) -> np.ndarray:
        """Raw id indexed array of eval ids, -1 where the raw id is unknown."""
        return self._lookup

    @property
    def thing_ids(self) -> List[int]:
        return [c for c in range(self.num_eval_classes) if self._thing_lut[c]]

    @property
    def stuff_ids(self) -> List[int]:
        return [c for c in range(self.num_eval_classes) if not self._thing_lut[c]]

    def is_thing(self, eval_id: int) -> bool:
        return 0 <= eval_id < self.num_eval_classes and bool(self._thing_lut[eval_id])

    def thing_mask(self, semantic: np.ndarray) -> np.ndarray:
        """
        Per-point mask of thing-class points.

        Args:
            semantic: Per-point evaluation class ids

        Returns:
            Boolean array, True where the class is a thing class
        """
        in_range = (semantic >= 0) & (semantic < self._thing_lut.shape[0])
        mask = np.zeros(semantic.shape, dtype=bool)
        mask[in_range] = self._thing_lut[semantic[in_range]]
        return mask

    def eval_name(self, eval_id: int) -> str:
        if eval_id == self.ignore_id:
            return "void"
        return self._names.get(eval_id, str(eval_id))

    @property
    def eval_names(self) -> List[str]:
        return [self.eval_name(c) for c in range(self.num_eval_classes)]

    def identity_over_eval(self) -> "ClassMap":
        """
        Build the class map for files already written in evaluation ids.

        Returns:
            ClassMap whose raw ids equal the eval ids, plus the ignore id
        """
        entries = [
            ClassMapEntry(
                raw_id=c,
                eval_id=c,
                name=self.eval_name(c),
                raw_name=self.eval_name(c),
                is_thing=self.is_thing(c),
            )
            for c in range(self.num_eval_classes)
        ]
        entries.append(
            ClassMapEntry(
                raw_id=self.ignore_id,
                eval_id=self.ignore_id,
                name="void",
                raw_name="void",
                is_ignore=True,
            )
        )
        return ClassMap(
            entries=entries,
            num_eval_classes=self.num_eval_classes,
            ignore_id=self.ignore_id,
        )


def _as_label_array(value) -> np.ndarray:
    array = np.array(value, dtype=np.int64).reshape(-1)
    array.setflags(write=False)
    return array


class ScanLabels(BaseModel):
    """Per-point semantic class id and instance id for one LiDAR scan."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    semantic: np.ndarray = Field(..., description="Per-point class id")
    instance: np.ndarray = Field(..., description="Per-point instance id, 0 = no instance")

    @field_validator("semantic", "instance", mode="before")
    @classmethod
    def to_array(cls, v) -> np.ndarray:
        return _as_label_array(v)

    @model_validator(mode="after")
    def validate_arrays(self) -> "ScanLabels":
        if self.semantic.shape[0] != self.instance.shape[0]:
            raise ValueError(
                f"semantic has {self.semantic.shape[0]} points but instance has {self.instance.shape[0]}"
            )
        if self.instance.size and (
            self.instance.min() < 0 or self.instance.max() > MAX_INSTANCE_ID
        ):
            raise ValueError(
                f"Instance ids must lie in [0, {MAX_INSTANCE_ID}], got "
                f"[{self.instance.min()}, {self.instance.max()}]"
            )
        return self

    @property
    def point_count(self) -> int:
        return int(self.semantic.shape[0])

    def permuted(self, order: np.ndarray) -> "ScanLabels":
        """Return the same labels with the points reordered."""
        return ScanLabels(semantic=self.semantic[order], instance=self.instance[order])


class SequenceLabels(BaseModel):
    """Temporally ordered scans of one sequence."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    sequence_id: str = Field(..., description="Sequence identifier")
    scans: List[Tuple[str, ScanLabels]] = Field(
        default_factory=list, description="(scan token, labels) in temporal order"
    )

    @property
    def tokens(self) -> List[str]:
        return [token for token, _ in self.scans]

    @property
    def frames(self) -> List[ScanLabels]:
        return [labels for _, labels in self.scans]

    def __len__(self) -> int:
        return len(self.scans)


class Segment(BaseModel):
    """Materialized instance mask of one scan."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    class_id: int = Field(..., description="Evaluation class id")
    instance_id: int = Field(..., description="Instance id within the scan")
    point_indices: np.ndarray = Field(..., description="Sorted point indices")

    @field_validator("point_indices", mode="before")
    @classmethod
    def to_index_array(cls, v) -> np.ndarray:
        array = np.unique(np.asarray(v, dtype=np.int64).reshape(-1))
        array.setflags(write=False)
        return array

    @field_validator("point_indices")
    @classmethod
    def not_empty(cls, v: np.ndarray) -> np.ndarray:
        if v.size == 0:
            raise ValueError("A segment needs at least one point")
        return v

    @property
    def size(self) -> int:
        return int(self.point_indices.shape[0])
