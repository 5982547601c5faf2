"""Deterministic discrete-event simulator of a layered room-security system.

Four device layers on one engine: a metal detector with its own local
alarm, a keypad access controller driving a fail-unlocked mag-lock, a
4-wire pressure-sensitive safety mat, and an OR-gate alarm fusion stage
rendered to a horn or blinking beacon. Scenarios are scripted in a small
text DSL and replay to byte-identical audit logs.
"""

__version__ = "0.1.0"

from .config import DEFAULTS, HarnessConfig, build_config, load_config_file
from .engine import (
    DebounceConfig,
    Engine,
    LogicLevel,
    SimEvent,
    TimedStimulus,
    debounce,
)
from .runner import Report, build_simulation, run_scenario, write_audit
from .scenario import Scenario, parse_scenario, serialize_scenario

__all__ = [
    "DEFAULTS",
    "DebounceConfig",
    "Engine",
    "HarnessConfig",
    "LogicLevel",
    "Report",
    "Scenario",
    "SimEvent",
    "TimedStimulus",
    "build_config",
    "build_simulation",
    "debounce",
    "load_config_file",
    "parse_scenario",
    "run_scenario",
    "serialize_scenario",
    "write_audit",
    "__version__",
]
