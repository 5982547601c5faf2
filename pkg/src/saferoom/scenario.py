"""Scenario script parsing and serialization.

Line-oriented grammar; ``#`` starts a comment, blank lines are ignored:

    scenario <name>
    end <ms>
    at <ms> power on|off
    at <ms> keypad inside|outside press <key> [bounce <n> <gap_ms>]
    at <ms> detector target mass=<g> distance=<cm>
    at <ms> mat load <kg>
    at <ms> mat unload
    at <ms> mat wire <1-4> open|intact
    at <ms> alarm reset

``<key>`` is one of 0-9, OPEN, CANCEL, CHANGE, RESET, DEFAULT. ``bounce``
expands one logical press into n raw edges gap_ms apart, exercising the
debounce filter. ``end`` is mandatory and terminates the script; stimulus
lines after it, or stimuli timed past it, are errors. Parse errors carry
the 1-based line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import mat as mat_mod
from .access import KEY_BY_TOKEN, KeyPress, KeypadSide
from .detector import Scan
from .engine import SetPower, SimTime, TimedStimulus
from .errors import ParseError
from .fusion import ResetAlarm

_TARGETS = {
    "power": "power",
    "keypad": "access",
    "detector": "detector",
    "mat": "mat",
    "alarm": "alarm",
}


@dataclass(frozen=True)
class Scenario:
    name: str
    end_ms: SimTime
    stimuli: tuple[TimedStimulus, ...]


def parse_scenario(text: str) -> Scenario:
    name: str | None = None
    end_ms: SimTime | None = None
    staged: list[tuple[int, TimedStimulus]] = []
    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "scenario":
            if name is not None:
                raise ParseError(lineno, "duplicate 'scenario' directive")
            if len(tokens) != 2:
                raise ParseError(lineno, "scenario name must be a single word")
            name = tokens[1]
        elif head == "end":
            if end_ms is not None:
                raise ParseError(lineno, "duplicate 'end' directive")
            if len(tokens) != 2:
                raise ParseError(lineno, "'end' takes exactly one time")
            end_ms = _non_negative_int(tokens[1], lineno, "end time")
        elif head == "at":
            if end_ms is not None:
                raise ParseError(lineno, "stimulus after 'end'")
            staged.append((lineno, _parse_stimulus(tokens, lineno)))
        else:
            raise ParseError(lineno, f"unknown directive {head!r}")
    if end_ms is None:
        raise ParseError(max(1, len(lines)), "missing 'end' directive")
    for lineno, stim in staged:
        if stim.at > end_ms:
            raise ParseError(
                lineno, f"stimulus at {stim.at}ms is after end at {end_ms}ms"
            )
    ordered = sorted(staged, key=lambda pair: pair[1].at)  # stable: line order ties
    return Scenario(
        name=name if name is not None else "unnamed",
        end_ms=end_ms,
        stimuli=tuple(stim for _, stim in ordered),
    )


def serialize_scenario(scenario: Scenario) -> str:
    """Render a Scenario back to script text; parsing it again round-trips."""
    out = [f"scenario {scenario.name}"]
    for stim in scenario.stimuli:
        out.append(f"at {stim.at} {stim.action.dsl()}")
    out.append(f"end {scenario.end_ms}")
    return "\n".join(out) + "\n"


def _parse_stimulus(tokens: list[str], lineno: int) -> TimedStimulus:
    if len(tokens) < 3:
        raise ParseError(lineno, "'at' needs a time and a device verb")
    at = _non_negative_int(tokens[1], lineno, "stimulus time")
    verb = tokens[2]
    rest = tokens[3:]
    if verb == "power":
        action = _parse_power(rest, lineno)
    elif verb == "keypad":
        action = _parse_keypad(rest, lineno)
    elif verb == "detector":
        action = _parse_detector(rest, lineno)
    elif verb == "mat":
        action = _parse_mat(rest, lineno)
    elif verb == "alarm":
        action = _parse_alarm(rest, lineno)
    else:
        raise ParseError(lineno, f"unknown device verb {verb!r}")
    return TimedStimulus(at=at, target=_TARGETS[verb], action=action)


def _parse_power(rest: list[str], lineno: int) -> SetPower:
    if len(rest) != 1 or rest[0] not in ("on", "off"):
        raise ParseError(lineno, "power takes exactly 'on' or 'off'")
    return SetPower(on=rest[0] == "on")


def _parse_keypad(rest: list[str], lineno: int) -> KeyPress:
    if len(rest) < 3 or rest[1] != "press":
        raise ParseError(lineno, "expected: keypad inside|outside press <key>")
    side_token, _, key_token = rest[0], rest[1], rest[2]
    if side_token not in ("inside", "outside"):
        raise ParseError(lineno, f"keypad side must be inside or outside, not {side_token!r}")
    key = KEY_BY_TOKEN.get(key_token)
    if key is None:
        raise ParseError(lineno, f"unknown key {key_token!r}")
    side = KeypadSide(side_token)
    extra = rest[3:]
    if not extra:
        return KeyPress(key=key, side=side)
    if len(extra) != 3 or extra[0] != "bounce":
        raise ParseError(lineno, "press options: bounce <n> <gap_ms>")
    count = _non_negative_int(extra[1], lineno, "bounce count")
    gap = _non_negative_int(extra[2], lineno, "bounce gap")
    if count < 1 or gap < 1:
        raise ParseError(lineno, "bounce count and gap must be >= 1")
    return KeyPress(key=key, side=side, bounce_count=count, bounce_gap_ms=gap)


def _parse_detector(rest: list[str], lineno: int) -> Scan:
    if len(rest) != 3 or rest[0] != "target":
        raise ParseError(lineno, "expected: detector target mass=<g> distance=<cm>")
    mass = _keyed_float(rest[1], "mass", lineno)
    distance = _keyed_float(rest[2], "distance", lineno)
    return Scan(mass_g=mass, distance_cm=distance)


def _parse_mat(rest: list[str], lineno: int):
    if not rest:
        raise ParseError(lineno, "mat needs a subcommand: load, unload, or wire")
    sub = rest[0]
    if sub == "load":
        if len(rest) != 2:
            raise ParseError(lineno, "expected: mat load <kg>")
        return mat_mod.SetLoad(kg=_non_negative_float(rest[1], lineno, "load"))
    if sub == "unload":
        if len(rest) != 1:
            raise ParseError(lineno, "'mat unload' takes no arguments")
        return mat_mod.ClearLoad()
    if sub == "wire":
        if len(rest) != 3:
            raise ParseError(lineno, "expected: mat wire <1-4> open|intact")
        wire = _non_negative_int(rest[1], lineno, "wire index")
        if not 1 <= wire <= mat_mod.WIRE_COUNT:
            raise ParseError(lineno, f"wire index must be 1..{mat_mod.WIRE_COUNT}")
        if rest[2] not in ("open", "intact"):
            raise ParseError(lineno, "wire condition must be open or intact")
        return mat_mod.SetWire(wire=wire, intact=rest[2] == "intact")
    raise ParseError(lineno, f"unknown mat subcommand {sub!r}")


def _parse_alarm(rest: list[str], lineno: int) -> ResetAlarm:
    if rest != ["reset"]:
        raise ParseError(lineno, "expected: alarm reset")
    return ResetAlarm()


def _non_negative_int(token: str, lineno: int, what: str) -> int:
    try:
        value = int(token, 10)
    except ValueError:
        raise ParseError(lineno, f"{what} must be an integer, not {token!r}") from None
    if value < 0:
        raise ParseError(lineno, f"{what} must be non-negative")
    return value


def _non_negative_float(token: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(lineno, f"{what} must be a number, not {token!r}") from None
    if not math.isfinite(value) or value < 0:
        raise ParseError(lineno, f"{what} must be a non-negative finite number")
    return value


def _keyed_float(token: str, expected_key: str, lineno: int) -> float:
    key, sep, value = token.partition("=")
    if not sep or key != expected_key:
        raise ParseError(lineno, f"expected {expected_key}=<number>, got {token!r}")
    return _non_negative_float(value, lineno, expected_key)
