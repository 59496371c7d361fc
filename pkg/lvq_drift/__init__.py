"""LVQ1 training under drifting class priors: Monte Carlo and ODE engines."""

from __future__ import annotations

from .config import canned_scenario, load_scenario, parse_config, serialize_config
from .const import VERSION
from .exceptions import LvqDriftError
from .harness import compare_curves, run_scenario
from .models import LearningCurve, OrderParams, Scenario, ScenarioResult
from .stream_gen import ModelParams

__version__ = VERSION

__all__ = [
    "LearningCurve",
    "LvqDriftError",
    "ModelParams",
    "OrderParams",
    "Scenario",
    "ScenarioResult",
    "__version__",
    "canned_scenario",
    "compare_curves",
    "load_scenario",
    "parse_config",
    "run_scenario",
    "serialize_config",
]
