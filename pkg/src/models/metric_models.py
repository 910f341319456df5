# /src/models/metric_models.py

"""
Metric Models

This module defines Pydantic models for finalized metric results and for the
structured report written by the CLI. Ratios are stored in [0, 1] at full
precision; absent values are None and render as "n/a".
"""

from datetime import datetime, timezone
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from constant import REPORT_SCHEMA, TOOLKIT_VERSION


class ClassIoU(BaseModel):
    """Semantic IoU of one evaluation class."""

    class_id: int = Field(..., description="Evaluation class id")
    name: str = Field(..., description="Evaluation class name")
    iou: Optional[float] = Field(None, description="IoU, None when the class is absent")


class SemanticResult(BaseModel):
    """Point-level semantic segmentation scores."""

    per_class: List[ClassIoU] = Field(default_factory=list, description="Per-class IoU")
    miou: float = Field(..., description="Mean IoU over present classes")
    fwiou: float = Field(..., description="Frequency-weighted IoU")
    total_points: int = Field(..., description="Number of evaluated ground-truth points")


class ClassPanopticScore(BaseModel):
    """PQ family scores and tallies of one class."""

    class_id: int = Field(..., description="Evaluation class id")
    name: str = Field(..., description="Evaluation class name")
    is_thing: bool = Field(..., description="Whether the class is a thing class")
    pq: Optional[float] = Field(None, description="Panoptic quality")
    sq: Optional[float] = Field(None, description="Segmentation quality")
    rq: Optional[float] = Field(None, description="Recognition quality")
    iou: Optional[float] = Field(None, description="Semantic IoU of the class")
    tp: int = Field(0, description="Matched segments")
    fp: int = Field(0, description="Unmatched predicted segments")
    fn: int = Field(0, description="Unmatched ground-truth segments")


class PanopticResult(BaseModel):
    """Per-class and aggregate panoptic scores, thing/stuff split."""

    per_class: List[ClassPanopticScore] = Field(default_factory=list)
    pq: float = Field(..., description="PQ over all present classes")
    sq: float = Field(..., description="SQ over all present classes")
    rq: float = Field(..., description="RQ over all present classes")
    pq_dagger: float = Field(..., description="PQ with stuff classes scored by IoU")
    pq_things: Optional[float] = Field(None, description="PQ over present thing classes")
    sq_things: Optional[float] = Field(None, description="SQ over present thing classes")
    rq_things: Optional[float] = Field(None, description="RQ over present thing classes")
    pq_stuff: Optional[float] = Field(None, description="PQ over present stuff classes")
    sq_stuff: Optional[float] = Field(None, description="SQ over present stuff classes")
    rq_stuff: Optional[float] = Field(None, description="RQ over present stuff classes")
    miou: Optional[float] = Field(None, description="Semantic mIoU over the same split")


class TrackDiagnostic(BaseModel):
    """Per-ground-truth-track ingredients of TQ."""

    sequence_id: str = Field(..., description="Sequence the track belongs to")
    track_id: int = Field(..., description="Ground-truth instance id")
    class_id: int = Field(..., description="Class of the track")
    length: int = Field(..., description="Number of frames the track is present")
    association_score: float = Field(..., description="AS(g)")
    id_switches: int = Field(..., description="IDS(g)")
    max_id_switches: int = Field(..., description="N_IDS(g)")
    tq: float = Field(..., description="TQ(g)")


class MeanComparison(BaseModel):
    """Arithmetic, geometric and harmonic means of PQ and TQ."""

    arithmetic: float
    geometric: float
    harmonic: float


class TrackingResult(BaseModel):
    """Sequence-level panoptic tracking scores."""

    pat: float = Field(..., description="Harmonic mean of PQ and TQ")
    pq: float = Field(..., description="Overall PQ of the split")
    tq: Optional[float] = Field(None, description="Tracking quality, None without gt tracks")
    ptq: float = Field(..., description="Panoptic tracking quality")
    lstq: float = Field(..., description="LiDAR segmentation and tracking quality")
    s_cls: float = Field(..., description="Semantic term of LSTQ")
    s_assoc: Optional[float] = Field(None, description="Association term of LSTQ")
    total_ids: int = Field(0, description="ID switches summed over all gt tracks")
    ptq_ids: int = Field(0, description="ID switches counted by PTQ")
    per_class_ptq: Dict[str, Optional[float]] = Field(default_factory=dict)
    tracks: List[TrackDiagnostic] = Field(default_factory=list)
    mean_comparison: Optional[MeanComparison] = Field(None)


class SequenceBreakdown(BaseModel):
    """Scores of one sequence evaluated on its own."""

    sequence_id: str
    frames: int
    miou: Optional[float] = None
    pq: Optional[float] = None
    gt_tracks: Optional[int] = None
    total_ids: Optional[int] = None
    tq: Optional[float] = None
    pat: Optional[float] = None
    ptq: Optional[float] = None
    lstq: Optional[float] = None


class ReportMeta(BaseModel):
    """Provenance of a report."""

    schema_version: str = Field(REPORT_SCHEMA, description="Report schema identifier")
    toolkit_version: str = Field(TOOLKIT_VERSION)
    command: str = Field(..., description="Subcommand that produced the report")
    config_digest: str = Field(..., description="SHA-256 of config and class map")
    manifest_digest: str = Field(..., description="SHA-256 of the manifest file")
    workers: int = Field(1, description="Worker processes used")
    timestamp: str = Field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(),
        description="When the report was produced",
    )


class MetricReport(BaseModel):
    """Finalized scores of one evaluation run."""

    meta: ReportMeta
    semantic: Optional[SemanticResult] = None
    panoptic: Optional[PanopticResult] = None
    tracking: Optional[TrackingResult] = None
    sequences: List[SequenceBreakdown] = Field(default_factory=list)
