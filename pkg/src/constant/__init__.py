# /src/constant/__init__.py

"""
Constants package for the panoptic evaluation toolkit.

This module exports the encoding, threshold and report constants.
"""

from .evaluation_constants import (
    TOOLKIT_VERSION,
    REPORT_SCHEMA,
    PANOPTIC_DIVISOR,
    MAX_INSTANCE_ID,
    DEFAULT_IGNORE_ID,
    DEFAULT_MIN_POINTS,
    MATCH_IOU_THRESHOLD,
    LABEL_FILE_SUFFIX,
    POINT_DIMENSIONS,
    WORKERS_ENV_VAR,
    DEFAULT_MAX_F1_DISTANCE,
)
