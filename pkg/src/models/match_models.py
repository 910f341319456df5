# /src/models/match_models.py

"""
Match Models

This module defines the Pydantic models produced by per-scan segment matching.
Stuff segments carry instance id 0.
"""

from typing import List, Optional

from pydantic import BaseModel, Field

from constant import PANOPTIC_DIVISOR


class MatchedPair(BaseModel):
    """A ground-truth and a predicted segment matched at IoU > 0.5."""

    class_id: int = Field(..., description="Shared evaluation class")
    gt_instance: int = Field(..., description="Ground-truth instance id")
    pred_instance: int = Field(..., description="Predicted instance id")
    iou: float = Field(..., gt=0.5, le=1.0, description="Point IoU of the pair")


class UnmatchedSegment(BaseModel):
    """A segment left without a partner."""

    class_id: int = Field(..., description="Evaluation class")
    instance_id: int = Field(..., description="Instance id")


class ScanMatches(BaseModel):
    """Outcome of matching one scan."""

    tp: List[MatchedPair] = Field(default_factory=list, description="Matched pairs")
    fp: List[UnmatchedSegment] = Field(
        default_factory=list, description="Predicted segments counted as false positives"
    )
    fn: List[UnmatchedSegment] = Field(
        default_factory=list, description="Ground-truth segments without a match"
    )


class TrackFrame(BaseModel):
    """Presence of a ground-truth track in one frame."""

    frame_index: int = Field(..., ge=0, description="Frame position in the sequence")
    matched_pred_id: Optional[int] = Field(
        None, description="Predicted packed key matched at IoU > 0.5, if any"
    )


class TrackRecord(BaseModel):
    """Frame-by-frame matching history of one ground-truth track."""

    sequence_id: str = Field(..., description="Sequence the track belongs to")
    track_id: int = Field(..., description="Ground-truth instance id")
    class_id: int = Field(..., description="Class of the track")
    frames: List[TrackFrame] = Field(default_factory=list, description="Ordered presences")

    @property
    def key(self) -> int:
        return self.class_id * PANOPTIC_DIVISOR + self.track_id

    @property
    def length(self) -> int:
        return len(self.frames)

    @property
    def matched_ids(self) -> List[Optional[int]]:
        return [frame.matched_pred_id for frame in self.frames]
