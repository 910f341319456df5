# /src/models/box_models.py

"""
Box Models

This module defines the 7-DoF oriented box used by the fusion procedures.
"""

import math
from typing import Optional, Tuple, Union

from pydantic import BaseModel, Field, field_validator


class Box3D(BaseModel):
    """Oriented 3D box with class, confidence and optional track id."""

    center: Tuple[float, float, float] = Field(..., description="Box center (x, y, z) in meters")
    size: Tuple[float, float, float] = Field(
        ..., description="Extents (w, l, h) along the box-local x, y and z axes, in meters"
    )
    yaw: float = Field(0.0, description="Heading around +z in radians, normalized to (-pi, pi]")
    class_id: int = Field(..., ge=0, description="Evaluation class id of the box")
    score: float = Field(1.0, ge=0.0, le=1.0, description="Detection confidence")
    track_id: Optional[Union[int, str]] = Field(
        None, description="Track identity, consistent across the scans of a sequence"
    )

    @field_validator("center")
    @classmethod
    def center_is_finite(cls, v):
        if not all(math.isfinite(c) for c in v):
            raise ValueError(f"Box center must be finite, got {v}")
        return v

    @field_validator("size")
    @classmethod
    def size_is_positive(cls, v):
        if not all(s > 0 for s in v):
            raise ValueError(f"Box size components must be > 0, got {v}")
        return v

    @field_validator("yaw")
    @classmethod
    def normalize_yaw(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError(f"Box yaw must be finite, got {v}")
        wrapped = math.remainder(v, 2.0 * math.pi)
        if wrapped <= -math.pi:
            wrapped += 2.0 * math.pi
        return wrapped

    @property
    def volume(self) -> float:
        w, l, h = self.size
        return w * l * h
