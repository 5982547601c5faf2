"""Environmental-layer metal detector.

The detector signals metallic targets above a sensitivity threshold and
sounds its own local alarm. Its output is deliberately never wired to the
alarm-fusion gate: by construction it touches no engine logic line.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Optional

from .engine import Engine, SimEvent, SimTime
from .errors import PowerOff


@dataclass(frozen=True)
class DetectorConfig:
    sensitivity_threshold: float = 0.5
    coupling_k: float = 1.0
    min_distance_cm: float = 1.0
    supply_volts: float = 9.0
    alarm_watts: float = 1.0

    def __post_init__(self):
        if self.sensitivity_threshold <= 0:
            raise ValueError("sensitivity_threshold must be > 0")
        if self.coupling_k <= 0:
            raise ValueError("coupling_k must be > 0")
        if self.min_distance_cm <= 0:
            raise ValueError("min_distance_cm must be > 0")


@dataclass(frozen=True)
class MetalTarget:
    mass_g: float
    distance_cm: float

    def __post_init__(self):
        if self.mass_g < 0:
            raise ValueError("mass_g must be non-negative")
        if self.distance_cm < 0:
            raise ValueError("distance_cm must be non-negative")


class ScanVerdict(Enum):
    DETECTED = "DETECTED"
    CLEAR = "CLEAR"


def coupling_signal(target: MetalTarget, cfg: DetectorConfig) -> float:
    """Coupling strength of a metal target at the search coil.

    Inverse-cube distance falloff with linear mass dependence; the
    distance is clamped at ``min_distance_cm`` to avoid the contact
    singularity. Zero mass couples nothing.
    """
    distance = max(target.distance_cm, cfg.min_distance_cm)
    return cfg.coupling_k * target.mass_g / distance**3


@dataclass(frozen=True)
class Scan:
    """Sweep the coil over a target of the given mass and distance."""

    mass_g: float
    distance_cm: float

    kind: ClassVar[str] = "SCAN"

    def describe(self) -> str:
        return f"mass={self.mass_g:g}g distance={self.distance_cm:g}cm"

    def dsl(self) -> str:
        return f"detector target mass={self.mass_g!r} distance={self.distance_cm!r}"


class MetalDetector:
    name = "detector"

    def __init__(self, engine: Engine, cfg: DetectorConfig):
        self.engine = engine
        self.cfg = cfg

    def on_power(self, on: bool, at: SimTime) -> None:
        if on:
            self.engine.emit(
                self.name,
                "INIT",
                f"ready threshold={self.cfg.sensitivity_threshold:g} "
                f"supply={self.cfg.supply_volts:g}V",
            )

    def handle(self, action, at: SimTime) -> None:
        self.scan(MetalTarget(action.mass_g, action.distance_cm), at)

    def scan(self, target: MetalTarget, at: SimTime) -> tuple[ScanVerdict, Optional[SimEvent]]:
        """Evaluate one sweep; DETECTED sounds the detector's own alarm."""
        if not self.engine.power_on:
            raise PowerOff("detector is unpowered")
        signal = coupling_signal(target, self.cfg)
        if signal >= self.cfg.sensitivity_threshold:
            self.engine.emit(
                self.name,
                "DETECTED",
                f"signal={signal:.6g} threshold={self.cfg.sensitivity_threshold:g}",
            )
            alarm = self.engine.emit(
                self.name, "LOCAL_ALARM", f"{self.cfg.alarm_watts:g}W sounder"
            )
            return ScanVerdict.DETECTED, alarm
        self.engine.emit(self.name, "CLEAR", f"signal={signal:.6g}")
        return ScanVerdict.CLEAR, None
