# /src/scenario/__init__.py

"""
Scenario package.

Seeded synthetic sequence pairs and the adversarial tracking case presets.
"""

from .scenario_generator import (
    SCENARIO_CLASS_MAP,
    frame_token,
    generate,
    permute_frames,
    split_track,
    transfer_id,
    void_instances,
    drop_instances,
    write_scenario,
)
from .cases import CASES, case1_pair, case2_transfer, case3_split, case4_void
