"""OR-gate alarm fusion with arming, latch, and sink rendering.

The gate fuses the mat's stop signal and the access controller's alarm
line; the mat contribution is armed only while no grant window is open
(a granted visitor may stand on the mat) and while the rail is up. The
controller's alarm line passes unconditionally. A latched drive stays
high until an explicit reset or a power cycle, and is rendered either as
a horn (on/off pair) or as a beacon blinking at a fixed period.

The metal detector has no input here by construction; it carries its own
local alarm.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Optional

from .access import AC_ALARM_LINE, GRANT_LINE
from .engine import Engine, LogicLevel, SimTime
from .mat import MAT_STOP_LINE


class SinkKind(Enum):
    HORN = "horn"
    BEACON = "beacon"


@dataclass(frozen=True)
class FusionInputs:
    mat_stop: LogicLevel
    ac_alarm: LogicLevel
    armed: bool


@dataclass(frozen=True)
class AlarmDrive:
    driven: LogicLevel = LogicLevel.LOW
    latched: bool = False
    since: Optional[SimTime] = None


def gate(inputs: FusionInputs) -> LogicLevel:
    """The OR gate: high iff (armed and mat stop high) or controller alarm high."""
    fired = (inputs.armed and inputs.mat_stop is LogicLevel.HIGH) or (
        inputs.ac_alarm is LogicLevel.HIGH
    )
    return LogicLevel.HIGH if fired else LogicLevel.LOW


def latch_step(drive: AlarmDrive, gated: LogicLevel, at: SimTime) -> AlarmDrive:
    """Advance the latch one step; only reset/power-cycle ever clears it."""
    if drive.latched:
        return drive
    if gated is LogicLevel.HIGH:
        return AlarmDrive(driven=LogicLevel.HIGH, latched=True, since=at)
    return AlarmDrive()


@dataclass(frozen=True)
class ResetAlarm:
    """Operator-authorized latch reset."""

    kind: ClassVar[str] = "ALARM_RESET"

    def describe(self) -> str:
        return "latch reset"

    def dsl(self) -> str:
        return "alarm reset"


class AlarmFusion:
    name = "alarm"

    def __init__(self, engine: Engine, sink: SinkKind, blink_period_ms: int = 500):
        if blink_period_ms < 1:
            raise ValueError("blink_period_ms must be >= 1")
        self.engine = engine
        self.sink = sink
        self.blink_period_ms = blink_period_ms
        self.drive = AlarmDrive()
        self.ever_latched = False
        self._blink_token = 0
        for line in (MAT_STOP_LINE, AC_ALARM_LINE, GRANT_LINE):
            engine.watch_line(line, self._on_line_change)

    def inputs(self) -> FusionInputs:
        return FusionInputs(
            mat_stop=self.engine.line(MAT_STOP_LINE),
            ac_alarm=self.engine.line(AC_ALARM_LINE),
            armed=self.engine.power_on
            and self.engine.line(GRANT_LINE) is LogicLevel.LOW,
        )

    def _on_line_change(self) -> None:
        self.step(self.engine.clock)

    def step(self, at: SimTime) -> None:
        inputs = self.inputs()
        new = latch_step(self.drive, gate(inputs), at)
        if new.latched and not self.drive.latched:
            self.drive = new
            self.ever_latched = True
            self.engine.emit(
                self.name,
                "ALARM_LATCHED",
                f"mat_stop={inputs.mat_stop} ac_alarm={inputs.ac_alarm}"
                f" armed={'yes' if inputs.armed else 'no'}",
            )
            self._sink_on(at)
        else:
            self.drive = new

    def handle(self, action, at: SimTime) -> None:
        self.reset(at)

    def reset(self, at: SimTime) -> None:
        """Clear the latch, then re-evaluate: a persisting cause re-latches."""
        self._clear(at, "reset")
        self.step(at)

    def _clear(self, at: SimTime, reason: str) -> None:
        self._blink_token += 1  # orphan any pending blink
        if self.drive.latched:
            self.engine.emit(self.name, "ALARM_CLEARED", reason)
            if self.sink is SinkKind.HORN:
                self.engine.emit(self.name, "HORN_OFF", "")
        self.drive = AlarmDrive()

    # -- sink rendering ----------------------------------------------------

    def _sink_on(self, at: SimTime) -> None:
        if self.sink is SinkKind.HORN:
            self.engine.emit(self.name, "HORN_ON", "continuous")
        else:
            self._blink_token += 1
            self._blink(self._blink_token)

    def _blink(self, token: int) -> None:
        if token != self._blink_token or not self.drive.latched:
            return
        self.engine.emit(self.name, "BLINK", f"period={self.blink_period_ms}ms")
        next_at = self.engine.clock + self.blink_period_ms
        self.engine.call_at(next_at, lambda: self._blink(token))

    # -- power -------------------------------------------------------------

    def on_power(self, on: bool, at: SimTime) -> None:
        if on:
            self.drive = AlarmDrive()
            self._blink_token += 1
            self.engine.emit(
                self.name,
                "INIT",
                f"sink={self.sink.value} blink={self.blink_period_ms}ms",
            )
            self.step(at)
        else:
            self._clear(at, "power lost")
