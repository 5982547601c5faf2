"""Exception hierarchy for the simulator.

Every error carries a stable ``code`` string so callers (CLI, service,
audit log) can report failures without string-matching messages.
"""

from __future__ import annotations


class SimulationError(Exception):
    """Base class for all simulator errors."""

    code = "SIMULATION_ERROR"


class ScheduleInPast(SimulationError):
    code = "SCHEDULE_IN_PAST"


class UnknownDevice(SimulationError):
    code = "UNKNOWN_DEVICE"


class UnorderedSamples(SimulationError):
    code = "UNORDERED_SAMPLES"


class DeviceRejection(SimulationError):
    """A device refused a stimulus but the simulation can continue.

    The engine converts these into REJECTED audit events instead of
    aborting the run; direct API callers see the exception.
    """

    code = "DEVICE_REJECTED"


class PowerOff(DeviceRejection):
    code = "POWER_OFF"


class Unpowered(DeviceRejection):
    code = "UNPOWERED"


class NegativeLoad(DeviceRejection):
    code = "NEGATIVE_LOAD"


class BadWireIndex(DeviceRejection):
    code = "BAD_WIRE_INDEX"


class MalformedPin(DeviceRejection):
    code = "MALFORMED_PIN"


class PersistError(SimulationError):
    """Writing the credential store failed; the prior PINs stay in force."""

    code = "PERSIST_FAIL"


class StoreError(SimulationError):
    """The credential store could not be read; the run cannot proceed."""

    code = "STORE_IO"


class ConfigError(SimulationError):
    code = "CONFIG_INVALID"


class ParseError(SimulationError):
    """Scenario script rejected; ``line`` is 1-based."""

    code = "PARSE_ERROR"

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason
