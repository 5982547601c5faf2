"""Wire all devices into one engine, run a scenario, persist the audit log.

The audit format is deliberately boring: one tab-separated line per
event (``ms<TAB>source<TAB>kind<TAB>detail``), UTF-8, LF endings, and a
final ``SUMMARY`` line. Running the same scenario against the same
config always produces the same bytes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .access import AccessController
from .config import HarnessConfig
from .detector import MetalDetector
from .engine import Engine, SimEvent
from .fusion import AlarmFusion
from .mat import PressureMat
from .scenario import Scenario


@dataclass
class Simulation:
    """One engine with the full device stack registered."""

    engine: Engine
    detector: MetalDetector
    access: AccessController
    mat: PressureMat
    alarm: AlarmFusion


@dataclass(frozen=True)
class Report:
    scenario: str
    config_digest: str
    events: tuple[SimEvent, ...]
    summary: dict[str, int]
    alarm_latched: bool


def build_simulation(cfg: HarnessConfig) -> Simulation:
    engine = Engine()
    detector = MetalDetector(engine, cfg.detector)
    access = AccessController(
        engine,
        cfg.policy,
        cfg.debounce,
        cfg.credential_store_path,
        cfg.factory_admin_pin,
        cfg.factory_user_pin,
    )
    mat = PressureMat(engine, cfg.mat)
    alarm = AlarmFusion(engine, cfg.sink, cfg.blink_period_ms)
    for device in (detector, access, mat, alarm):
        engine.register(device)
    return Simulation(engine, detector, access, mat, alarm)


def summarize(events) -> dict[str, int]:
    return dict(sorted(Counter(event.kind for event in events).items()))


def run_scenario(scenario: Scenario, cfg: HarnessConfig) -> Report:
    """Run to the scenario's end time and report; pure for fixed inputs."""
    sim = build_simulation(cfg)
    for stimulus in scenario.stimuli:
        sim.engine.schedule(stimulus)
    events = sim.engine.run_until(scenario.end_ms)
    return Report(
        scenario=scenario.name,
        config_digest=cfg.digest(),
        events=tuple(events),
        summary=summarize(events),
        alarm_latched=sim.alarm.ever_latched,
    )


def audit_lines(report: Report) -> list[str]:
    lines = [
        f"{event.at}\t{event.source}\t{event.kind}\t{event.detail}"
        for event in report.events
    ]
    lines.append(f"SUMMARY\talarm_latched={'true' if report.alarm_latched else 'false'}")
    return lines


def write_audit(report: Report, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in audit_lines(report):
            fh.write(line + "\n")


def format_report_text(report: Report) -> str:
    out = [
        f"scenario: {report.scenario}",
        f"config: sha256:{report.config_digest}",
        f"events: {len(report.events)}",
    ]
    for kind, count in report.summary.items():
        out.append(f"  {kind}: {count}")
    out.append(f"alarm_latched: {'true' if report.alarm_latched else 'false'}")
    return "\n".join(out) + "\n"
