"""Deterministic discrete-event engine.

A millisecond integer clock, a stimulus queue ordered by (time, insertion
sequence), named logic lines with synchronous change notification, and a
digital debounce filter shared by the device modules.

Determinism rules:
  * time is integer milliseconds; no floats anywhere in sequencing,
  * equal-timestamp entries run FIFO in insertion order,
  * devices are stepped only at stimulus delivery and at timer callbacks
    they requested themselves; there is no free-running polling loop.

One engine instance owns all device state. Independent instances share
nothing and may run in parallel; no operation here is reentrant.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .errors import DeviceRejection, ScheduleInPast, UnknownDevice, UnorderedSamples

SimTime = int  # non-negative milliseconds since scenario start

POWER_TARGET = "power"  # pseudo-device: the shared supply rail


class LogicLevel(Enum):
    """A binary logic line level; no floating or tri-state values."""

    LOW = 0
    HIGH = 1

    def __str__(self) -> str:
        return "high" if self is LogicLevel.HIGH else "low"


@dataclass(frozen=True)
class SimEvent:
    """One audit-log record.

    Fields must stay free of tabs and line breaks so the tab-separated
    audit format never needs escaping; this is enforced at creation.
    """

    at: SimTime
    source: str
    kind: str
    detail: str = ""

    def __post_init__(self):
        if self.at < 0:
            raise ValueError("event time must be non-negative")
        for name in ("source", "kind", "detail"):
            value = getattr(self, name)
            if any(c in value for c in "\t\n\r"):
                raise ValueError(f"event {name} may not contain tabs or line breaks")


@dataclass(frozen=True)
class TimedStimulus:
    """A scripted input: deliver ``action`` to device ``target`` at ``at``."""

    at: SimTime
    target: str
    action: object


@dataclass(frozen=True)
class SetPower:
    """Turn the shared supply rail on or off."""

    on: bool

    @property
    def kind(self) -> str:
        return "POWER_ON" if self.on else "POWER_OFF"

    def describe(self) -> str:
        return "rail on" if self.on else "rail off"

    def dsl(self) -> str:
        return "power on" if self.on else "power off"


@dataclass(frozen=True)
class DebounceConfig:
    """Stability window for the digital debounce filter.

    Stands in for the analog buffer + RC remedy: a level change is
    accepted only once the line has held the new value for ``stable_ms``.
    """

    stable_ms: int = 20

    def __post_init__(self):
        if self.stable_ms < 1:
            raise ValueError("stable_ms must be >= 1")


def debounce(
    samples: list[tuple[SimTime, LogicLevel]],
    cfg: DebounceConfig,
) -> list[tuple[SimTime, LogicLevel]]:
    """Filter a raw level trace down to its accepted edges.

    ``samples`` are (time, level) points of a step waveform: the line
    holds each sampled level until the next sample, and the first sample
    defines the initial accepted level. An edge is accepted at
    ``t + stable_ms`` only when the level that appeared at ``t`` is still
    present at that instant (no intervening transition); accepted edges
    therefore alternate and every accepted level persisted for at least
    the stability window.

    Raises UnorderedSamples if timestamps decrease.
    """
    if not samples:
        return []
    for (t0, _), (t1, _) in zip(samples, samples[1:]):
        if t1 < t0:
            raise UnorderedSamples(f"sample at {t1}ms after sample at {t0}ms")

    # The last sample at a given instant wins, then collapse to actual
    # transitions; a repeated level is just the line being re-sampled.
    by_time: dict[SimTime, LogicLevel] = {}
    for t, level in samples:
        by_time[t] = level
    points = list(by_time.items())

    transitions: list[tuple[SimTime, LogicLevel]] = []
    current = points[0][1]
    for t, level in points[1:]:
        if level is not current:
            transitions.append((t, level))
            current = level

    accepted = points[0][1]
    edges: list[tuple[SimTime, LogicLevel]] = []
    for i, (t, level) in enumerate(transitions):
        t_next = transitions[i + 1][0] if i + 1 < len(transitions) else None
        if level is accepted:
            continue
        if t_next is None or t_next - t > cfg.stable_ms:
            edges.append((t + cfg.stable_ms, level))
            accepted = level
    return edges


class Engine:
    """The event loop: clock, queue, device registry, lines, audit log."""

    def __init__(self):
        self.clock: SimTime = 0
        self.power_on = False
        self.power_epoch = 0  # bumped on every rail transition; stale timers check it
        self._devices: dict[str, object] = {}
        self._order: list[object] = []
        self._queue: list[tuple[SimTime, int, object]] = []
        self._seq = 0
        self._events: list[SimEvent] = []
        self._lines: dict[str, LogicLevel] = {}
        self._watchers: dict[str, list[Callable[[], None]]] = {}
        # test/diagnostic hooks, called after every processed queue entry
        self.step_listeners: list[Callable[[Engine], None]] = []

    # -- device registry -------------------------------------------------

    def register(self, device) -> None:
        name = device.name
        if name == POWER_TARGET or name in self._devices:
            raise ValueError(f"device name {name!r} already taken")
        self._devices[name] = device
        self._order.append(device)

    def device(self, name: str):
        return self._devices[name]

    # -- scheduling ------------------------------------------------------

    @property
    def pending(self) -> int:
        """Number of queued stimuli and timer callbacks."""
        return len(self._queue)

    def schedule(self, stimulus: TimedStimulus) -> None:
        if stimulus.at < self.clock:
            raise ScheduleInPast(
                f"stimulus at {stimulus.at}ms but clock is at {self.clock}ms"
            )
        if stimulus.target != POWER_TARGET and stimulus.target not in self._devices:
            raise UnknownDevice(f"no device named {stimulus.target!r}")
        self._push(stimulus.at, stimulus)

    def call_at(self, at: SimTime, callback: Callable[[], None]) -> None:
        """Schedule a device timer callback; FIFO with stimuli at equal times."""
        if at < self.clock:
            raise ScheduleInPast(f"timer at {at}ms but clock is at {self.clock}ms")
        self._push(at, callback)

    def _push(self, at: SimTime, payload) -> None:
        heapq.heappush(self._queue, (at, self._seq, payload))
        self._seq += 1

    # -- event log -------------------------------------------------------

    def emit(self, source: str, kind: str, detail: str = "") -> SimEvent:
        event = SimEvent(at=self.clock, source=source, kind=kind, detail=detail)
        self._events.append(event)
        return event

    @property
    def event_count(self) -> int:
        return len(self._events)

    def events_since(self, mark: int) -> list[SimEvent]:
        return list(self._events[mark:])

    # -- logic lines -----------------------------------------------------

    def line(self, name: str) -> LogicLevel:
        return self._lines.get(name, LogicLevel.LOW)

    def set_line(self, name: str, level: LogicLevel) -> None:
        if self._lines.get(name, LogicLevel.LOW) is level:
            return
        self._lines[name] = level
        for callback in list(self._watchers.get(name, [])):
            callback()

    def watch_line(self, name: str, callback: Callable[[], None]) -> None:
        self._watchers.setdefault(name, []).append(callback)

    # -- main loop -------------------------------------------------------

    def run_until(self, end: SimTime) -> list[SimEvent]:
        """Process every queued entry with ``at <= end``; return the full log.

        Repeated runs of an identically prepared queue produce identical
        logs. The clock lands on ``end`` even if the queue drains early.
        """
        while self._queue and self._queue[0][0] <= end:
            at, _, payload = heapq.heappop(self._queue)
            self.clock = at
            if isinstance(payload, TimedStimulus):
                self._deliver(payload)
            else:
                payload()
            for listener in list(self.step_listeners):
                listener(self)
        self.clock = max(self.clock, end)
        return list(self._events)

    def _deliver(self, stimulus: TimedStimulus) -> None:
        action = stimulus.action
        if stimulus.target == POWER_TARGET:
            self._switch_power(action)
            return
        device = self._devices[stimulus.target]
        self.emit(stimulus.target, action.kind, action.describe())
        try:
            device.handle(action, self.clock)
        except DeviceRejection as exc:
            self.emit(stimulus.target, "REJECTED", f"{exc.code}: {exc}")

    def _switch_power(self, action: SetPower) -> None:
        if action.on == self.power_on:
            self.emit(POWER_TARGET, action.kind, "rail unchanged")
            return
        self.emit(POWER_TARGET, action.kind, action.describe())
        self.power_on = action.on
        self.power_epoch += 1
        for device in self._order:
            device.on_power(action.on, self.clock)
