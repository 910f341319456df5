# /src/constant/evaluation_constants.py

"""
Evaluation constants shared by the label model, metric engines and the CLI.
"""

TOOLKIT_VERSION = "1.0.0"
REPORT_SCHEMA = "report_v1"

# Packed panoptic labels: class_id * PANOPTIC_DIVISOR + instance_id
PANOPTIC_DIVISOR = 1000
MAX_INSTANCE_ID = PANOPTIC_DIVISOR - 1

DEFAULT_IGNORE_ID = 255
DEFAULT_MIN_POINTS = 15
MATCH_IOU_THRESHOLD = 0.5

LABEL_FILE_SUFFIX = ".panoptic.bin"
POINT_DIMENSIONS = 4

WORKERS_ENV_VAR = "PANEVAL_WORKERS"

DEFAULT_MAX_F1_DISTANCE = 2.0
