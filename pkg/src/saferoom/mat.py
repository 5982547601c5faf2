"""Intrusion-detection layer: a 4-wire pressure-sensitive safety mat.

Two electrode plates, two monitor wires per plate. The monitor polls the
loop at a fixed period and drives the ``mat_stop`` line: HIGH on plate
actuation or on any broken wire, with a broken loop (FAULT) dominating
actuation because a broken loop cannot vouch for the plates. An unpowered
monitor fails safe and holds the stop line HIGH.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar

from .engine import Engine, LogicLevel, SimTime
from .errors import BadWireIndex, NegativeLoad, PowerOff

MAT_STOP_LINE = "mat_stop"

WIRE_COUNT = 4


class MatStatus(Enum):
    OK = "OK"
    ACTUATED = "ACTUATED"
    FAULT = "FAULT"


@dataclass(frozen=True)
class MatConfig:
    actuation_threshold_kg: float = 15.0
    poll_period_ms: int = 50
    cable_m: float = 6.0

    def __post_init__(self):
        if self.actuation_threshold_kg <= 0:
            raise ValueError("actuation_threshold_kg must be > 0")
        if self.poll_period_ms < 1:
            raise ValueError("poll_period_ms must be >= 1")


@dataclass
class MatCircuit:
    """Electrical state of the mat: wire continuity and plate load."""

    actuation_threshold_kg: float
    wires_intact: list[bool] = field(default_factory=lambda: [True] * WIRE_COUNT)
    load_kg: float = 0.0

    @property
    def plates_bridged(self) -> bool:
        # inclusive: a load exactly at threshold closes the plates
        return self.load_kg >= self.actuation_threshold_kg

    @property
    def loop_intact(self) -> bool:
        return all(self.wires_intact)


@dataclass(frozen=True)
class SetLoad:
    kg: float

    kind: ClassVar[str] = "MAT_LOAD"

    def describe(self) -> str:
        return f"{self.kg:g}kg"

    def dsl(self) -> str:
        return f"mat load {self.kg!r}"


@dataclass(frozen=True)
class ClearLoad:
    kind: ClassVar[str] = "MAT_UNLOAD"

    def describe(self) -> str:
        return "load removed"

    def dsl(self) -> str:
        return "mat unload"


@dataclass(frozen=True)
class SetWire:
    wire: int
    intact: bool

    kind: ClassVar[str] = "MAT_WIRE"

    def describe(self) -> str:
        return f"wire {self.wire} {'intact' if self.intact else 'open'}"

    def dsl(self) -> str:
        return f"mat wire {self.wire} {'intact' if self.intact else 'open'}"


class PressureMat:
    name = "mat"

    def __init__(self, engine: Engine, cfg: MatConfig):
        self.engine = engine
        self.cfg = cfg
        self.circuit = MatCircuit(cfg.actuation_threshold_kg)
        self.status = MatStatus.OK

    # The physical circuit changes regardless of monitor power; only the
    # monitor's polling requires the rail.

    def apply_load(self, kg: float, at: SimTime) -> None:
        if kg < 0:
            raise NegativeLoad(f"load {kg}kg is negative")
        self.circuit.load_kg = kg

    def set_wire(self, wire: int, intact: bool, at: SimTime) -> None:
        if not 1 <= wire <= WIRE_COUNT:
            raise BadWireIndex(f"wire index {wire} outside 1..{WIRE_COUNT}")
        self.circuit.wires_intact[wire - 1] = intact

    def handle(self, action, at: SimTime) -> None:
        if isinstance(action, SetLoad):
            self.apply_load(action.kg, at)
        elif isinstance(action, ClearLoad):
            self.apply_load(0.0, at)
        elif isinstance(action, SetWire):
            self.set_wire(action.wire, action.intact, at)
        else:
            raise TypeError(f"mat cannot handle {action!r}")

    def evaluate(self) -> MatStatus:
        """Monitor verdict for the current circuit; FAULT dominates."""
        if not self.circuit.loop_intact:
            return MatStatus.FAULT
        if self.circuit.plates_bridged:
            return MatStatus.ACTUATED
        return MatStatus.OK

    def poll(self, at: SimTime) -> tuple[MatStatus, LogicLevel]:
        """One monitor pass: verdict plus the stop-signal level it drives."""
        if not self.engine.power_on:
            raise PowerOff("mat monitor is unpowered")
        status = self.evaluate()
        stop = LogicLevel.LOW if status is MatStatus.OK else LogicLevel.HIGH
        if status is not self.status:
            self.status = status
            self.engine.emit(
                self.name, "MAT_STATUS", f"{status.value} stop={stop}"
            )
        self.engine.set_line(MAT_STOP_LINE, stop)
        return status, stop

    def on_power(self, on: bool, at: SimTime) -> None:
        if on:
            self.status = MatStatus.OK
            self.engine.set_line(MAT_STOP_LINE, LogicLevel.LOW)
            self.engine.emit(
                self.name,
                "INIT",
                f"monitor online poll={self.cfg.poll_period_ms}ms "
                f"threshold={self.cfg.actuation_threshold_kg:g}kg",
            )
            self._schedule_poll(at)
        else:
            # de-energized monitor: stop asserts, nothing left to vouch for the mat
            self.engine.emit(self.name, "MAT_STATUS", "fail-safe stop=high (unpowered)")
            self.engine.set_line(MAT_STOP_LINE, LogicLevel.HIGH)

    def _schedule_poll(self, at: SimTime) -> None:
        epoch = self.engine.power_epoch

        def tick():
            if self.engine.power_epoch != epoch or not self.engine.power_on:
                return
            self.poll(self.engine.clock)
            self._schedule_poll(self.engine.clock + self.cfg.poll_period_ms)

        self.engine.call_at(at, tick)
