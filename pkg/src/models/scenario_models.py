# /src/models/scenario_models.py

"""
Scenario Models

This module defines the Pydantic models describing a synthetic tracking
scenario: ground-truth tracks and the per-frame prediction plan.
"""

from typing import Dict, List, Literal, Union

from pydantic import BaseModel, Field

DROP = "DROP"
VOID = "VOID"

# A plan entry is a predicted instance id, DROP (instance missing) or VOID (points ignored)
PlanEntry = Union[int, Literal["DROP", "VOID"]]


class TrackSpec(BaseModel):
    """A ground-truth track present on a contiguous frame range (1-based, inclusive)."""

    track_id: int = Field(..., ge=1, le=999, description="Ground-truth instance id")
    class_id: int = Field(0, ge=0, description="Thing class of the track")
    first_frame: int = Field(..., ge=1, description="First frame the track is present")
    last_frame: int = Field(..., ge=1, description="Last frame the track is present")
    points_per_frame: int = Field(20, ge=1, description="Points of the mask in every frame")

    @property
    def length(self) -> int:
        return self.last_frame - self.first_frame + 1

    def frames(self) -> List[int]:
        return list(range(self.first_frame, self.last_frame + 1))


class ScenarioSpec(BaseModel):
    """Ground-truth layout plus the prediction plan of one synthetic sequence."""

    sequence_id: str = Field("scenario", description="Sequence identifier of the output")
    frames: int = Field(..., ge=1, description="Number of scans")
    tracks: List[TrackSpec] = Field(default_factory=list)
    pred_plan: Dict[int, List[PlanEntry]] = Field(
        default_factory=dict,
        description="Per track id, one entry per frame of its presence",
    )
    background_points: int = Field(
        10, ge=0, description="Stuff points emitted in every scan"
    )
    seed: int = Field(0, description="Seed for the point order shuffle")
