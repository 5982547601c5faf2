"""Mechanical/electronic access-control layer.

A keypad-driven controller: debounced key lines, dual-memory PIN
verification (stored PIN copied into a compare register before every
comparison), admin/user credentials persisted to a small flat file with
an EEPROM-style 128-byte budget, a relay-driven mag-lock that fails
unlocked on power loss, and an alarm output line latched high after too
many consecutive denials.

Two keypads exist, inside and outside the room; RESET and DEFAULT are
honored only from the inside.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import ClassVar, Optional

from .engine import DebounceConfig, Engine, LogicLevel, SimEvent, SimTime
from .errors import MalformedPin, PersistError, StoreError, Unpowered

AC_ALARM_LINE = "ac_alarm"
GRANT_LINE = "grant_open"

MAX_STORE_BYTES = 128  # EEPROM budget for the persisted credential store

PIN_MIN_LEN = 4
PIN_MAX_LEN = 6


class Key(Enum):
    D0 = "0"
    D1 = "1"
    D2 = "2"
    D3 = "3"
    D4 = "4"
    D5 = "5"
    D6 = "6"
    D7 = "7"
    D8 = "8"
    D9 = "9"
    OPEN = "OPEN"
    CANCEL = "CANCEL"
    CHANGE_PASS = "CHANGE"
    RESET = "RESET"
    DEFAULT = "DEFAULT"

    @property
    def label(self) -> str:
        return self.value

    @property
    def digit(self) -> Optional[str]:
        return self.value if self.value.isdigit() else None


KEY_BY_TOKEN = {key.value: key for key in Key}


class KeypadSide(Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class Pin:
    """A 4-6 digit numeric code."""

    digits: str

    def __post_init__(self):
        if not (PIN_MIN_LEN <= len(self.digits) <= PIN_MAX_LEN):
            raise MalformedPin(
                f"pin length {len(self.digits)} outside {PIN_MIN_LEN}..{PIN_MAX_LEN}"
            )
        if not self.digits.isdigit():
            raise MalformedPin("pin must be decimal digits only")


@dataclass(frozen=True)
class CompareRegister:
    """Scratch copy of a stored PIN used for comparison.

    Verification compares against this snapshot, never against the
    credential store itself, so comparing can never mutate storage.
    """

    snapshot: Pin

    def matches(self, entered: str) -> bool:
        if len(entered) != len(self.snapshot.digits):
            return False
        return all(a == b for a, b in zip(entered, self.snapshot.digits))


@dataclass
class CredentialStore:
    """Admin and user PINs, optionally persisted to a flat file.

    File format: ``admin=<digits>`` newline ``user=<digits>`` newline,
    ASCII, at most MAX_STORE_BYTES on disk. Writes are atomic
    (write-then-rename) so a failed write leaves the prior PINs in force.
    """

    admin_pin: Pin
    user_pin: Pin
    path: Optional[Path] = None
    persisted: bool = False

    def serialized(self) -> bytes:
        return f"admin={self.admin_pin.digits}\nuser={self.user_pin.digits}\n".encode(
            "ascii"
        )

    @classmethod
    def load(
        cls, path: Optional[Path], factory_admin: Pin, factory_user: Pin
    ) -> "CredentialStore":
        """Read the store file, falling back to factory PINs if absent."""
        if path is None or not path.exists():
            return cls(factory_admin, factory_user, path, persisted=False)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise StoreError(f"cannot read credential store: {exc}") from exc
        if len(raw) > MAX_STORE_BYTES:
            raise StoreError(
                f"credential store is {len(raw)} bytes, budget is {MAX_STORE_BYTES}"
            )
        pins: dict[str, Pin] = {}
        for line in raw.decode("ascii", errors="replace").splitlines():
            name, sep, value = line.partition("=")
            if sep and name in ("admin", "user"):
                try:
                    pins[name] = Pin(value)
                except MalformedPin as exc:
                    raise StoreError(f"bad {name} pin in store: {exc}") from exc
        if set(pins) != {"admin", "user"}:
            raise StoreError("credential store must define admin and user pins")
        return cls(pins["admin"], pins["user"], path, persisted=True)

    def save(self) -> None:
        if self.path is None:
            raise PersistError("no credential store path configured")
        data = self.serialized()
        if len(data) > MAX_STORE_BYTES:
            raise PersistError("serialized store exceeds the 128-byte budget")
        tmp = self.path.with_name(self.path.name + ".tmp")
        try:
            tmp.write_bytes(data)
            os.replace(tmp, self.path)
        except OSError as exc:
            raise PersistError(f"cannot write credential store: {exc}") from exc
        self.persisted = True


class Mode(Enum):
    UNPOWERED = "UNPOWERED"
    IDLE = "IDLE"
    ENTERING = "ENTERING"
    GRANTED = "GRANTED"
    CHANGE_AWAIT_OLD = "CHANGE_AWAIT_OLD"
    CHANGE_AWAIT_NEW = "CHANGE_AWAIT_NEW"


CHANGE_MODES = (Mode.CHANGE_AWAIT_OLD, Mode.CHANGE_AWAIT_NEW)


@dataclass(frozen=True)
class ControllerState:
    """Point-in-time snapshot of the controller."""

    mode: Mode
    entry_buffer: str
    consecutive_denials: int
    grant_expires_at: Optional[SimTime]
    alarm_line: LogicLevel


@dataclass
class MagLock:
    powered: bool = False
    engaged: bool = False


class LockState(Enum):
    LOCKED = "LOCKED"
    UNLOCKED = "UNLOCKED"


class AccessVerdict(Enum):
    GRANTED = "GRANTED"
    DENIED = "DENIED"


class ChangeResult(Enum):
    OK = "OK"
    REJECTED = "REJECTED"


@dataclass(frozen=True)
class AccessPolicy:
    denial_limit: int = 3
    grant_window_ms: int = 5000
    change_timeout_ms: int = 30000
    supply_volts: float = 5.0

    def __post_init__(self):
        if self.denial_limit < 1:
            raise ValueError("denial_limit must be >= 1")
        if self.grant_window_ms < 1:
            raise ValueError("grant_window_ms must be >= 1")
        if self.change_timeout_ms < 1:
            raise ValueError("change_timeout_ms must be >= 1")


@dataclass(frozen=True)
class KeyPress:
    """One logical key press, optionally with contact bounce.

    ``bounce_count`` raw edges ``bounce_gap_ms`` apart feed the debounce
    filter; a clean press is a single rising edge.
    """

    key: Key
    side: KeypadSide
    bounce_count: int = 1
    bounce_gap_ms: int = 0

    kind: ClassVar[str] = "KEY_PRESS"

    def describe(self) -> str:
        text = f"{self.key.label} {self.side.value}"
        if self.bounce_count > 1:
            text += f" bounce={self.bounce_count} gap={self.bounce_gap_ms}ms"
        return text

    def dsl(self) -> str:
        text = f"keypad {self.side.value} press {self.key.label}"
        if (self.bounce_count, self.bounce_gap_ms) != (1, 0):
            text += f" bounce {self.bounce_count} {self.bounce_gap_ms}"
        return text


@dataclass
class _KeyLine:
    """Debounce state of one physical key contact."""

    level: LogicLevel = LogicLevel.LOW
    accepted: LogicLevel = LogicLevel.LOW
    last_change: Optional[SimTime] = None


class AccessController:
    name = "access"

    def __init__(
        self,
        engine: Engine,
        policy: AccessPolicy,
        debounce_cfg: DebounceConfig,
        store_path: Optional[str | Path],
        factory_admin_pin: Pin,
        factory_user_pin: Pin,
    ):
        self.engine = engine
        self.policy = policy
        self.debounce_cfg = debounce_cfg
        self.store_path = Path(store_path) if store_path is not None else None
        self.factory_admin_pin = factory_admin_pin
        self.factory_user_pin = factory_user_pin
        self.store = CredentialStore(
            factory_admin_pin, factory_user_pin, self.store_path, persisted=False
        )
        self.mode = Mode.UNPOWERED
        self.entry_buffer = ""
        self.consecutive_denials = 0
        self.grant_expires_at: Optional[SimTime] = None
        self.alarm_line = LogicLevel.LOW
        self.maglock = MagLock()
        self._key_lines: dict[tuple[KeypadSide, Key], _KeyLine] = {}
        self._change_old: Optional[str] = None
        self._change_activity: Optional[SimTime] = None

    def state(self) -> ControllerState:
        return ControllerState(
            mode=self.mode,
            entry_buffer=self.entry_buffer,
            consecutive_denials=self.consecutive_denials,
            grant_expires_at=self.grant_expires_at,
            alarm_line=self.alarm_line,
        )

    # -- keypad front end (raw edges through the debounce filter) ---------

    def handle(self, action, at: SimTime) -> None:
        self.press(action, at)

    def press(self, press: KeyPress, at: SimTime) -> None:
        """Feed a logical press to the key line as raw (possibly bouncy) edges.

        Each accepted rising edge becomes one on_key delivery; a burst
        that settles low before the stability window never registers.
        """
        if not self.engine.power_on:
            raise Unpowered("keypad is unpowered")
        gap = press.bounce_gap_ms
        last = at
        for i in range(press.bounce_count):
            t = at + i * gap
            level = LogicLevel.HIGH if i % 2 == 0 else LogicLevel.LOW
            self._edge_at(press.side, press.key, level, t)
            last = t
        # silent release once the press has had time to be accepted
        release = last + self.debounce_cfg.stable_ms + 1
        self._edge_at(press.side, press.key, LogicLevel.LOW, release)

    def _edge_at(self, side: KeypadSide, key: Key, level: LogicLevel, t: SimTime) -> None:
        if t == self.engine.clock:
            self._raw_edge(side, key, level, t)
            return
        epoch = self.engine.power_epoch

        def apply():
            if self.engine.power_epoch == epoch:
                self._raw_edge(side, key, level, t)

        self.engine.call_at(t, apply)

    def _raw_edge(self, side: KeypadSide, key: Key, level: LogicLevel, t: SimTime) -> None:
        line = self._key_lines.setdefault((side, key), _KeyLine())
        if line.level is level:
            return
        line.level = level
        line.last_change = t
        epoch = self.engine.power_epoch
        self.engine.call_at(
            t + self.debounce_cfg.stable_ms, lambda: self._settle(side, key, t, epoch)
        )

    def _settle(self, side: KeypadSide, key: Key, t0: SimTime, epoch: int) -> None:
        # accept the edge only if nothing moved the line since t0
        if self.engine.power_epoch != epoch or not self.engine.power_on:
            return
        line = self._key_lines.setdefault((side, key), _KeyLine())
        if line.last_change != t0 or line.level is line.accepted:
            return
        line.accepted = line.level
        if line.accepted is LogicLevel.HIGH:
            self.engine.emit(self.name, "KEY", f"{key.label} {side.value}")
            self.on_key(key, side, self.engine.clock)

    # -- state machine -----------------------------------------------------

    def on_key(self, key: Key, side: KeypadSide, at: SimTime) -> list[SimEvent]:
        """Process one already-debounced key press; returns the events it caused."""
        if not self.engine.power_on:
            raise Unpowered("controller is unpowered")
        mark = self.engine.event_count
        if key.digit is not None:
            self._on_digit(key.digit, at)
        elif key is Key.CANCEL:
            self._on_cancel()
        elif key is Key.OPEN:
            self._on_open(at)
        elif key is Key.CHANGE_PASS:
            self._enter_change_flow(at)
        else:  # RESET or DEFAULT
            self._admin_restore(key, side, at)
        return self.engine.events_since(mark)

    def _on_digit(self, digit: str, at: SimTime) -> None:
        if len(self.entry_buffer) < PIN_MAX_LEN:
            self.entry_buffer += digit
        if self.mode is Mode.IDLE:
            self.mode = Mode.ENTERING
        elif self.mode in CHANGE_MODES:
            self._bump_change_activity(at)

    def _on_cancel(self) -> None:
        self.entry_buffer = ""
        if self.mode is Mode.ENTERING or self.mode in CHANGE_MODES:
            self.mode = Mode.IDLE
            self._change_old = None

    def _on_open(self, at: SimTime) -> None:
        buffer, self.entry_buffer = self.entry_buffer, ""
        if self.mode is Mode.CHANGE_AWAIT_OLD:
            self._change_old = buffer
            self.mode = Mode.CHANGE_AWAIT_NEW
            self.engine.emit(self.name, "CHANGE", "await new pin")
            self._bump_change_activity(at)
        elif self.mode is Mode.CHANGE_AWAIT_NEW:
            old, self._change_old = self._change_old or "", None
            self.mode = Mode.IDLE
            try:
                result = self.change_pin(old, buffer, at)
            except MalformedPin:
                self.engine.emit(self.name, "CHANGE_REJECTED", "new pin malformed")
            except PersistError:
                self.engine.emit(self.name, "PERSIST_FAIL", "prior pins in force")
            else:
                if result is ChangeResult.REJECTED:
                    self.engine.emit(self.name, "CHANGE_REJECTED", "old pin mismatch")
        else:
            if self.mode is Mode.ENTERING:
                self.mode = Mode.IDLE
            try:
                self.verify_pin(buffer, at)
            except MalformedPin:
                pass  # already counted and logged as a denial

    def _enter_change_flow(self, at: SimTime) -> None:
        self.mode = Mode.CHANGE_AWAIT_OLD
        self.entry_buffer = ""
        self._change_old = None
        self.engine.emit(self.name, "CHANGE", "await old pin")
        self._bump_change_activity(at)

    def _bump_change_activity(self, at: SimTime) -> None:
        self._change_activity = at
        epoch = self.engine.power_epoch
        deadline = at + self.policy.change_timeout_ms

        def expire():
            if self.engine.power_epoch != epoch:
                return
            if self.mode in CHANGE_MODES and self._change_activity == at:
                self.mode = Mode.IDLE
                self.entry_buffer = ""
                self._change_old = None
                self.engine.emit(self.name, "CHANGE_TIMEOUT", "flow abandoned")

        self.engine.call_at(deadline, expire)

    def _admin_restore(self, key: Key, side: KeypadSide, at: SimTime) -> None:
        if side is KeypadSide.OUTSIDE:
            self.engine.emit(self.name, "REJECTED_SIDE", f"{key.label} from outside")
            return
        attempt, self.entry_buffer = self.entry_buffer, ""
        if self.mode in CHANGE_MODES or self.mode is Mode.ENTERING:
            self.mode = Mode.IDLE
            self._change_old = None
        if not CompareRegister(Pin(self.store.admin_pin.digits)).matches(attempt):
            self.engine.emit(self.name, "ADMIN_REJECTED", f"{key.label} requires admin pin")
            return
        old_admin, old_user = self.store.admin_pin, self.store.user_pin
        if key is Key.RESET:
            self.store.user_pin = self.factory_user_pin
        else:
            self.store.admin_pin = self.factory_admin_pin
            self.store.user_pin = self.factory_user_pin
        try:
            self.store.save()
        except PersistError:
            self.store.admin_pin, self.store.user_pin = old_admin, old_user
            self.engine.emit(self.name, "PERSIST_FAIL", "prior pins in force")
            return
        if key is Key.RESET:
            self.engine.emit(self.name, "PIN_RESET", "user pin restored to factory default")
        else:
            self.engine.emit(self.name, "PINS_DEFAULTED", "factory pins restored")

    # -- verification and credential changes -------------------------------

    def verify_pin(self, entered: str, at: Optional[SimTime] = None) -> AccessVerdict:
        """Compare an entered code against the stored PINs.

        The stored PIN is copied into a CompareRegister first; the store
        itself is never touched. A malformed entry counts as a denial.
        """
        if not self.engine.power_on:
            raise Unpowered("controller is unpowered")
        now = self.engine.clock if at is None else at
        try:
            Pin(entered)
        except MalformedPin:
            self._register_denial("malformed entry")
            raise
        for label, stored in (("user", self.store.user_pin), ("admin", self.store.admin_pin)):
            register = CompareRegister(snapshot=Pin(stored.digits))
            if register.matches(entered):
                self._grant(label, now)
                return AccessVerdict.GRANTED
        self._register_denial("wrong pin")
        return AccessVerdict.DENIED

    def _register_denial(self, reason: str) -> None:
        self.consecutive_denials += 1
        self.engine.emit(
            self.name,
            "DENIED",
            f"{reason} ({self.consecutive_denials}/{self.policy.denial_limit})",
        )
        if (
            self.consecutive_denials >= self.policy.denial_limit
            and self.alarm_line is LogicLevel.LOW
        ):
            self.alarm_line = LogicLevel.HIGH
            self.engine.emit(self.name, "AC_ALARM", "high (denial limit reached)")
            self.engine.set_line(AC_ALARM_LINE, LogicLevel.HIGH)

    def _grant(self, label: str, now: SimTime) -> None:
        self.consecutive_denials = 0
        self.mode = Mode.GRANTED
        expiry = now + self.policy.grant_window_ms
        self.grant_expires_at = expiry
        self.engine.emit(
            self.name, "GRANTED", f"{label} pin; unlocked for {self.policy.grant_window_ms}ms"
        )
        if self.alarm_line is LogicLevel.HIGH:
            self.alarm_line = LogicLevel.LOW
            self.engine.emit(self.name, "AC_ALARM", "low (access granted)")
            self.engine.set_line(AC_ALARM_LINE, LogicLevel.LOW)
        self.engine.emit(self.name, "MAGLOCK", "unlocked (grant window open)")
        self.engine.set_line(GRANT_LINE, LogicLevel.HIGH)
        epoch = self.engine.power_epoch

        def close():
            if self.engine.power_epoch != epoch:
                return
            if self.grant_expires_at == expiry:
                self._close_grant()

        self.engine.call_at(expiry, close)

    def _close_grant(self) -> None:
        self.grant_expires_at = None
        if self.mode is Mode.GRANTED:
            self.mode = Mode.IDLE
        self.engine.emit(self.name, "MAGLOCK", "locked (grant window closed)")
        self.engine.set_line(GRANT_LINE, LogicLevel.LOW)

    def change_pin(self, old: str, new: str, at: Optional[SimTime] = None) -> ChangeResult:
        """Replace the user or admin PIN, whichever ``old`` authenticates.

        The persisted store is updated atomically; on any failure the
        prior PIN stays in force both in memory and on disk.
        """
        if not self.engine.power_on:
            raise Unpowered("controller is unpowered")
        if CompareRegister(Pin(self.store.user_pin.digits)).matches(old):
            target = "user"
        elif CompareRegister(Pin(self.store.admin_pin.digits)).matches(old):
            target = "admin"
        else:
            return ChangeResult.REJECTED
        new_pin = Pin(new)  # raises MalformedPin before any mutation
        old_admin, old_user = self.store.admin_pin, self.store.user_pin
        if target == "user":
            self.store.user_pin = new_pin
        else:
            self.store.admin_pin = new_pin
        try:
            self.store.save()
        except PersistError:
            self.store.admin_pin, self.store.user_pin = old_admin, old_user
            raise
        self.engine.emit(self.name, "PIN_CHANGED", f"{target} pin updated")
        return ChangeResult.OK

    # -- power and the mag-lock --------------------------------------------

    def on_power(self, on: bool, at: SimTime) -> list[SimEvent]:
        mark = self.engine.event_count
        if on:
            self.store = CredentialStore.load(
                self.store_path, self.factory_admin_pin, self.factory_user_pin
            )
            self.mode = Mode.IDLE
            self.maglock.powered = True
            self.maglock.engaged = True
            source = "from store" if self.store.persisted else "factory defaults"
            self.engine.emit(
                self.name,
                "INIT",
                f"pins {source}; maglock engaged; supply={self.policy.supply_volts:g}V",
            )
        else:
            self.mode = Mode.UNPOWERED
            # fail-unlocked: the collapsing field releases in the same tick
            self.maglock.powered = False
            self.maglock.engaged = False
            self.engine.emit(self.name, "MAGLOCK", "unlocked (power lost)")
        # volatile state never survives a rail transition
        self.entry_buffer = ""
        self.consecutive_denials = 0
        self.grant_expires_at = None
        self._change_old = None
        self._change_activity = None
        self.alarm_line = LogicLevel.LOW
        self._key_lines.clear()
        self.engine.set_line(AC_ALARM_LINE, LogicLevel.LOW)
        self.engine.set_line(GRANT_LINE, LogicLevel.LOW)
        return self.engine.events_since(mark)

    def grant_window_open(self) -> bool:
        return (
            self.grant_expires_at is not None
            and self.engine.clock < self.grant_expires_at
        )

    def maglock_state(self) -> LockState:
        if self.maglock.powered and self.maglock.engaged and not self.grant_window_open():
            return LockState.LOCKED
        return LockState.UNLOCKED
