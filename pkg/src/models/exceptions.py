# /src/models/exceptions.py

"""
Exception Models Module

This module defines the exception hierarchy raised by the evaluation toolkit.
Every error derives from ValueError so callers that already guard against
invalid input keep working.
"""

from typing import Optional


class PanopticEvalError(ValueError):
    """Base class for all toolkit errors."""


class UnknownRawClassError(PanopticEvalError):
    """A raw semantic id is absent from the class map."""

    def __init__(self, raw_id: int, source: Optional[str] = None):
        self.raw_id = raw_id
        self.source = source
        where = f" in {source}" if source else ""
        super().__init__(f"Raw class id {raw_id} is not in the class map{where}")


class LengthMismatchError(PanopticEvalError):
    """Ground truth and prediction disagree on the number of points."""

    def __init__(self, expected: int, actual: int, token: Optional[str] = None):
        self.expected = expected
        self.actual = actual
        self.token = token
        where = f" for scan '{token}'" if token else ""
        super().__init__(
            f"Point count mismatch{where}: ground truth has {expected}, prediction has {actual}"
        )


class NoPresentClassesError(PanopticEvalError):
    """Every class is absent, so no mean can be formed."""


class FrameCountMismatchError(PanopticEvalError):
    """Ground truth and prediction sequences have different lengths."""


class InvalidPlanError(PanopticEvalError):
    """A scenario prediction plan does not cover the ground-truth presence."""


class BadPermutationError(PanopticEvalError):
    """A frame permutation is not a bijection on the frame indices."""


class OutOfRangeFrameError(PanopticEvalError):
    """A plan operator referenced a frame outside the track presence."""


class MalformedManifestError(PanopticEvalError):
    """A manifest document is missing fields or is inconsistent."""


class TokenMismatchError(PanopticEvalError):
    """Ground-truth and prediction scan token sets differ."""


class InstanceRangeError(PanopticEvalError):
    """An instance id does not fit the packed label encoding."""
