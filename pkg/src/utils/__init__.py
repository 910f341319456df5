# /src/utils/__init__.py

"""
Utilities package for the panoptic evaluation toolkit.

This package contains label I/O, label operations, report rendering and the
parallel map helper.
"""

# Import I/O helpers for easy access at the package level
from .label_io import (
    decode_panoptic,
    encode_panoptic,
    load_labels,
    save_labels,
    load_points,
    load_boxes,
    save_boxes,
    load_class_map,
    save_class_map,
    load_manifest,
    load_structured,
    dump_structured,
    file_digest,
)

# Import label operations
from .label_utils import (
    remap,
    segment_keys,
    extract_segments,
    filter_min_points,
    small_instance_mask,
    instance_void_mask,
)

from .parallel_utils import ordered_map, resolve_workers

from .report_utils import (
    to_percent,
    summary_table,
    per_class_table,
    sequence_table,
    render_report,
    write_report,
    write_table_csv,
    load_report,
)
