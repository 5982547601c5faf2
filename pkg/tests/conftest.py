"""Shared fixtures, independent reference oracles, and scenario generators."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from saferoom import build_config
from saferoom.access import Key, KeyPress, KeypadSide
from saferoom.detector import Scan
from saferoom.engine import LogicLevel, SetPower, SimTime, TimedStimulus
from saferoom.fusion import ResetAlarm
from saferoom.mat import ClearLoad, SetLoad, SetWire
from saferoom.scenario import Scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def cfg(tmp_path):
    return build_config({"credential_store_path": str(tmp_path / "credentials.store")})


def make_config(tmp_path, **overrides):
    merged = {"credential_store_path": str(tmp_path / "credentials.store")}
    merged.update(overrides)
    return build_config(merged)


def load_canonical(name: str) -> str:
    return (SCENARIO_DIR / name).read_text(encoding="utf-8")


def reference_debounce(
    samples: list[tuple[SimTime, LogicLevel]], stable_ms: int
) -> list[tuple[SimTime, LogicLevel]]:
    """Sample-by-sample debounce oracle.

    Reconstructs the waveform millisecond by millisecond and runs a
    counter-style filter over the ticks, independently of the
    event-arithmetic production filter.
    """
    if not samples:
        return []
    t0 = samples[0][0]
    horizon = samples[-1][0] + stable_ms + 1
    levels = []
    idx = 0
    current = samples[0][1]
    for t in range(t0, horizon + 1):
        while idx < len(samples) and samples[idx][0] == t:
            current = samples[idx][1]
            idx += 1
        levels.append(current)
    accepted = levels[0]
    edges = []
    run_level = levels[0]
    run_start = t0
    for i in range(1, len(levels)):
        t = t0 + i
        if levels[i] is not run_level:
            run_level = levels[i]
            run_start = t
        if run_level is not accepted and t - run_start == stable_ms:
            edges.append((t, run_level))
            accepted = run_level
    return edges


def random_trace(rng: random.Random, length: int = 12) -> list[tuple[int, LogicLevel]]:
    """A bouncy random level trace with non-decreasing timestamps."""
    t = rng.randint(0, 5)
    samples = [(t, rng.choice((LogicLevel.LOW, LogicLevel.HIGH)))]
    for _ in range(length):
        t += rng.randint(0, 30)
        samples.append((t, rng.choice((LogicLevel.LOW, LogicLevel.HIGH))))
    return samples


def random_scenario(
    rng: random.Random, *, end_ms: int = 10_000, count: int = 30, name: str = "random"
) -> Scenario:
    """A reproducible random stimulus mix across all devices."""
    stimuli = [TimedStimulus(0, "power", SetPower(on=True))]
    t = 0
    keys = list(Key)
    sides = list(KeypadSide)
    for _ in range(count):
        t = min(t + rng.randint(0, max(1, (2 * end_ms) // count)), end_ms)
        roll = rng.random()
        if roll < 0.15:
            stimuli.append(TimedStimulus(t, "power", SetPower(on=rng.random() < 0.7)))
        elif roll < 0.50:
            press = KeyPress(rng.choice(keys), rng.choice(sides))
            if rng.random() < 0.3:
                press = KeyPress(
                    press.key,
                    press.side,
                    bounce_count=rng.randint(2, 5),
                    bounce_gap_ms=rng.randint(1, 8),
                )
            stimuli.append(TimedStimulus(t, "access", press))
        elif roll < 0.65:
            scan = Scan(round(rng.uniform(0, 50), 1), round(rng.uniform(0, 30), 1))
            stimuli.append(TimedStimulus(t, "detector", scan))
        elif roll < 0.80:
            if rng.random() < 0.7:
                stimuli.append(
                    TimedStimulus(t, "mat", SetLoad(round(rng.uniform(0, 100), 1)))
                )
            else:
                stimuli.append(TimedStimulus(t, "mat", ClearLoad()))
        elif roll < 0.95:
            stimuli.append(
                TimedStimulus(t, "mat", SetWire(rng.randint(1, 4), rng.random() < 0.5))
            )
        else:
            stimuli.append(TimedStimulus(t, "alarm", ResetAlarm()))
    return Scenario(name=name, end_ms=end_ms, stimuli=tuple(stimuli))
