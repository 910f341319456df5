# /src/models/__init__.py

"""
Models package for the panoptic evaluation toolkit.

This package contains the Pydantic models for labels, boxes, configuration,
scenarios, matches and reports, plus the exception hierarchy.
"""

from .label_models import ClassMapEntry, ClassMap, ScanLabels, SequenceLabels, Segment

from .box_models import Box3D

from .config_models import (
    EvaluationConfig,
    FusionConfig,
    ManifestScan,
    ManifestSequence,
    Manifest,
)

from .match_models import MatchedPair, UnmatchedSegment, ScanMatches, TrackFrame, TrackRecord

from .metric_models import (
    ClassIoU,
    SemanticResult,
    ClassPanopticScore,
    PanopticResult,
    TrackDiagnostic,
    MeanComparison,
    TrackingResult,
    SequenceBreakdown,
    ReportMeta,
    MetricReport,
)

from .scenario_models import DROP, VOID, TrackSpec, ScenarioSpec

from .exceptions import (
    PanopticEvalError,
    UnknownRawClassError,
    LengthMismatchError,
    NoPresentClassesError,
    FrameCountMismatchError,
    InvalidPlanError,
    BadPermutationError,
    OutOfRangeFrameError,
    MalformedManifestError,
    TokenMismatchError,
    InstanceRangeError,
)
