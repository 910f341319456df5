import logging

import numpy as np
import pytest

from models.config_models import EvaluationConfig
from scenario.scenario_generator import SCENARIO_CLASS_MAP


@pytest.fixture
def class_map():
    """car (thing), pedestrian (thing), vegetation (stuff), 255 void."""
    return SCENARIO_CLASS_MAP


@pytest.fixture
def exact_config():
    """No point filter, so every instance takes part in matching."""
    return EvaluationConfig(min_points=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(autouse=True)
def reset_logging():
    """Drop the handlers a CLI run installs on the root logger."""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if type(handler).__module__.startswith("_pytest"):
            continue
        root.removeHandler(handler)
        handler.close()
