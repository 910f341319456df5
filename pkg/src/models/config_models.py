# /src/models/config_models.py

"""
Configuration Models

This module defines Pydantic models for evaluation and fusion configuration and
for the dataset manifest that lists sequences, scans and their files.
"""

import hashlib
import json
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from constant import DEFAULT_MAX_F1_DISTANCE, DEFAULT_MIN_POINTS


class EvaluationConfig(BaseModel):
    """Behavior flags shared by the semantic, panoptic and tracking evaluations."""

    min_points: int = Field(
        DEFAULT_MIN_POINTS,
        ge=0,
        description="Instances are kept only with strictly more points than this",
    )
    apply_filter_to: Literal["gt", "pred", "both"] = Field(
        "both", description="Which side the minimum-point filter applies to"
    )
    ids_gap_mode: Literal["skip", "count"] = Field(
        "skip", description="Whether a ground-truth presence gap counts as an ID switch"
    )
    track_mean: Literal["global", "per-sequence"] = Field(
        "global", description="How per-track TQ values are averaged"
    )
    remap_predictions: bool = Field(
        False, description="Whether predictions are stored in raw ids and need remapping"
    )
    parallelism: int = Field(1, ge=1, description="Number of worker processes")

    @property
    def filter_gt(self) -> bool:
        return self.apply_filter_to in ("gt", "both")

    @property
    def filter_pred(self) -> bool:
        return self.apply_filter_to in ("pred", "both")

    def digest(self, extra: str = "") -> str:
        """
        Hash the behavior-relevant settings.

        Parallelism is left out: serial and parallel runs produce the same report.

        Args:
            extra: Additional canonical text to fold in (e.g. the class map JSON)

        Returns:
            Hex SHA-256 digest
        """
        payload = json.dumps(
            self.model_dump(exclude={"parallelism"}), sort_keys=True
        ) + extra
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class FusionConfig(BaseModel):
    """Settings for building panoptic labels from semantic labels and boxes."""

    mode: Literal["gt", "pred"] = Field(..., description="Which fusion procedure to run")
    threshold_mode: Literal["none", "fixed", "per-class", "max-f1"] = Field(
        "none", description="How detection boxes are filtered by confidence"
    )
    score_threshold: float = Field(
        0.0, ge=0.0, le=1.0, description="Boxes with a lower score are dropped in fixed mode"
    )
    class_thresholds: Dict[int, float] = Field(
        default_factory=dict, description="Per-class score thresholds for per-class mode"
    )
    max_f1_distance: float = Field(
        DEFAULT_MAX_F1_DISTANCE,
        gt=0.0,
        description="Center distance (m) for matching detections when selecting max-F1 thresholds",
    )

    @field_validator("class_thresholds")
    @classmethod
    def thresholds_in_unit_range(cls, v: Dict[int, float]) -> Dict[int, float]:
        for class_id, threshold in v.items():
            if not 0.0 <= threshold <= 1.0:
                raise ValueError(
                    f"Threshold for class {class_id} must lie in [0, 1], got {threshold}"
                )
        return v


class ManifestScan(BaseModel):
    """Files of one scan, relative to the manifest directory."""

    token: str = Field(..., min_length=1, description="Scan token")
    gt: Optional[Path] = Field(None, description="Ground-truth label file")
    pred: Optional[Path] = Field(None, description="Predicted label file")
    points: Optional[Path] = Field(None, description="Point cloud file")
    boxes: Optional[Path] = Field(
        None,
        description="Box file fused by `fuse`: detections in pred mode, annotations in gt mode "
        "when gt_boxes is absent",
    )
    gt_boxes: Optional[Path] = Field(
        None,
        description="Annotated boxes; fused in gt mode and used to pick max-F1 detection thresholds",
    )


class ManifestSequence(BaseModel):
    """Scans of one sequence in temporal order."""

    sequence_id: str = Field(..., min_length=1, description="Sequence identifier")
    scans: List[ManifestScan] = Field(default_factory=list, description="Ordered scans")

    @model_validator(mode="after")
    def tokens_are_unique(self) -> "ManifestSequence":
        tokens = [scan.token for scan in self.scans]
        duplicates = sorted({t for t in tokens if tokens.count(t) > 1})
        if duplicates:
            raise ValueError(
                f"Sequence '{self.sequence_id}' repeats scan tokens {duplicates}"
            )
        return self


class Manifest(BaseModel):
    """Dataset listing: sequences, ordered scan tokens and their files."""

    sequences: List[ManifestSequence] = Field(..., description="Sequences of the split")
    root: Path = Field(Path("."), description="Directory relative paths resolve against")

    @model_validator(mode="after")
    def sequences_are_unique(self) -> "Manifest":
        ids = [seq.sequence_id for seq in self.sequences]
        duplicates = sorted({s for s in ids if ids.count(s) > 1})
        if duplicates:
            raise ValueError(f"Manifest repeats sequence ids {duplicates}")
        return self

    def resolve(self, path: Optional[Path]) -> Optional[Path]:
        """Resolve a manifest-relative path."""
        if path is None:
            return None
        return path if path.is_absolute() else self.root / path

    @property
    def scan_count(self) -> int:
        return sum(len(seq.scans) for seq in self.sequences)
