"""Harness configuration: flat ``key = value`` file with full defaults.

Every key has a default; unknown keys are hard errors so typos never
silently fall back. ``#`` starts a comment. The config digest identifies
the behavioral configuration, so the credential store path (deployment
detail, not behavior) is excluded from it.

Keys and defaults:

    detector.sensitivity_threshold = 0.5
    detector.coupling_k            = 1.0
    detector.min_distance_cm       = 1.0
    detector.supply_volts          = 9.0
    detector.alarm_watts           = 1.0
    access.denial_limit            = 3
    access.grant_window_ms         = 5000
    access.change_timeout_ms       = 30000
    access.supply_volts            = 5.0
    access.factory_admin_pin       = 002200
    access.factory_user_pin        = 1234
    mat.actuation_threshold_kg     = 15.0
    mat.poll_period_ms             = 50
    mat.cable_m                    = 6.0
    debounce.stable_ms             = 20
    sink                           = horn
    blink_period_ms                = 500
    credential_store_path          = credentials.store
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Mapping

from .access import AccessPolicy, Pin
from .detector import DetectorConfig
from .engine import DebounceConfig
from .errors import ConfigError, MalformedPin
from .fusion import SinkKind
from .mat import MatConfig

DEFAULTS: dict[str, str] = {
    "detector.sensitivity_threshold": "0.5",
    "detector.coupling_k": "1.0",
    "detector.min_distance_cm": "1.0",
    "detector.supply_volts": "9.0",
    "detector.alarm_watts": "1.0",
    "access.denial_limit": "3",
    "access.grant_window_ms": "5000",
    "access.change_timeout_ms": "30000",
    "access.supply_volts": "5.0",
    "access.factory_admin_pin": "002200",
    "access.factory_user_pin": "1234",
    "mat.actuation_threshold_kg": "15.0",
    "mat.poll_period_ms": "50",
    "mat.cable_m": "6.0",
    "debounce.stable_ms": "20",
    "sink": "horn",
    "blink_period_ms": "500",
    "credential_store_path": "credentials.store",
}


@dataclass(frozen=True)
class HarnessConfig:
    detector: DetectorConfig
    policy: AccessPolicy
    mat: MatConfig
    debounce: DebounceConfig
    sink: SinkKind
    blink_period_ms: int
    credential_store_path: str
    factory_admin_pin: Pin
    factory_user_pin: Pin

    def canonical_items(self) -> list[tuple[str, str]]:
        """Normalized behavioral key/value pairs, sorted by key."""
        items = {
            "detector.sensitivity_threshold": repr(self.detector.sensitivity_threshold),
            "detector.coupling_k": repr(self.detector.coupling_k),
            "detector.min_distance_cm": repr(self.detector.min_distance_cm),
            "detector.supply_volts": repr(self.detector.supply_volts),
            "detector.alarm_watts": repr(self.detector.alarm_watts),
            "access.denial_limit": str(self.policy.denial_limit),
            "access.grant_window_ms": str(self.policy.grant_window_ms),
            "access.change_timeout_ms": str(self.policy.change_timeout_ms),
            "access.supply_volts": repr(self.policy.supply_volts),
            "access.factory_admin_pin": self.factory_admin_pin.digits,
            "access.factory_user_pin": self.factory_user_pin.digits,
            "mat.actuation_threshold_kg": repr(self.mat.actuation_threshold_kg),
            "mat.poll_period_ms": str(self.mat.poll_period_ms),
            "mat.cable_m": repr(self.mat.cable_m),
            "debounce.stable_ms": str(self.debounce.stable_ms),
            "sink": self.sink.value,
            "blink_period_ms": str(self.blink_period_ms),
        }
        return sorted(items.items())

    def digest(self) -> str:
        text = "\n".join(f"{k} = {v}" for k, v in self.canonical_items())
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_config_text(text: str) -> dict[str, str]:
    """Parse overrides from config-file text; values stay strings here."""
    overrides: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        key = key.strip()
        value = value.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        if key in overrides:
            raise ConfigError(f"line {lineno}: duplicate config key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        overrides[key] = value
    return overrides


def build_config(overrides: Mapping[str, str] | None = None) -> HarnessConfig:
    """Merge overrides onto defaults and build the typed config."""
    merged = dict(DEFAULTS)
    for key, value in (overrides or {}).items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        merged[key] = str(value)

    try:
        detector = DetectorConfig(
            sensitivity_threshold=_as_float(merged, "detector.sensitivity_threshold"),
            coupling_k=_as_float(merged, "detector.coupling_k"),
            min_distance_cm=_as_float(merged, "detector.min_distance_cm"),
            supply_volts=_as_float(merged, "detector.supply_volts"),
            alarm_watts=_as_float(merged, "detector.alarm_watts"),
        )
        policy = AccessPolicy(
            denial_limit=_as_int(merged, "access.denial_limit"),
            grant_window_ms=_as_int(merged, "access.grant_window_ms"),
            change_timeout_ms=_as_int(merged, "access.change_timeout_ms"),
            supply_volts=_as_float(merged, "access.supply_volts"),
        )
        mat = MatConfig(
            actuation_threshold_kg=_as_float(merged, "mat.actuation_threshold_kg"),
            poll_period_ms=_as_int(merged, "mat.poll_period_ms"),
            cable_m=_as_float(merged, "mat.cable_m"),
        )
        debounce = DebounceConfig(stable_ms=_as_int(merged, "debounce.stable_ms"))
        blink_period_ms = _as_int(merged, "blink_period_ms")
        if blink_period_ms < 1:
            raise ValueError("blink_period_ms must be >= 1")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    sink_value = merged["sink"]
    try:
        sink = SinkKind(sink_value)
    except ValueError:
        raise ConfigError(
            f"sink must be horn or beacon, not {sink_value!r}"
        ) from None

    try:
        factory_admin = Pin(merged["access.factory_admin_pin"])
        factory_user = Pin(merged["access.factory_user_pin"])
    except MalformedPin as exc:
        raise ConfigError(f"factory pin invalid: {exc}") from exc

    return HarnessConfig(
        detector=detector,
        policy=policy,
        mat=mat,
        debounce=debounce,
        sink=sink,
        blink_period_ms=blink_period_ms,
        credential_store_path=merged["credential_store_path"],
        factory_admin_pin=factory_admin,
        factory_user_pin=factory_user,
    )


def load_config_file(path) -> HarnessConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return build_config(parse_config_text(fh.read()))


def _as_int(merged: Mapping[str, str], key: str) -> int:
    value = merged[key]
    try:
        return int(value, 10)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, not {value!r}") from None


def _as_float(merged: Mapping[str, str], key: str) -> float:
    value = merged[key]
    try:
        parsed = float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a number, not {value!r}") from None
    if not math.isfinite(parsed):
        raise ConfigError(f"{key} must be finite")
    return parsed
