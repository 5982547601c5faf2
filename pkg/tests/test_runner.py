"""End-to-end runs: canonical flows, audit format, determinism, fail-safety."""

from __future__ import annotations

import random

import pytest

from saferoom import parse_scenario, run_scenario, write_audit
from saferoom.access import LockState, Mode
from saferoom.engine import SimEvent
from saferoom.errors import StoreError
from saferoom.runner import Report, audit_lines, build_simulation, summarize

from conftest import load_canonical, make_config, random_scenario


class TestCanonicalFlows:
    def test_granted_entry_latches_nothing(self, tmp_path):
        report = run_scenario(
            parse_scenario(load_canonical("granted.scn")), make_config(tmp_path)
        )
        assert not report.alarm_latched
        assert report.summary.get("GRANTED") == 1
        assert "ALARM_LATCHED" not in report.summary

    def test_denials_plus_mat_latch_with_ac_event_first(self, tmp_path):
        report = run_scenario(
            parse_scenario(load_canonical("intrusion.scn")), make_config(tmp_path)
        )
        assert report.alarm_latched
        kinds = [e.kind for e in report.events]
        assert kinds.index("AC_ALARM") < kinds.index("ALARM_LATCHED")
        assert report.summary["DENIED"] == 3

    def test_wire_fault_alone_latches(self, tmp_path):
        report = run_scenario(
            parse_scenario(load_canonical("mat_fault.scn")), make_config(tmp_path)
        )
        assert report.alarm_latched
        assert report.summary.get("DENIED") is None

    def test_detector_only_never_latches(self, tmp_path):
        report = run_scenario(
            parse_scenario(load_canonical("detector_only.scn")), make_config(tmp_path)
        )
        assert not report.alarm_latched
        assert report.summary.get("LOCAL_ALARM", 0) >= 1


class TestReport:
    def test_summary_counts_equal_recount(self, tmp_path):
        rng = random.Random(31)
        report = run_scenario(random_scenario(rng, count=40), make_config(tmp_path))
        assert report.summary == summarize(report.events)

    def test_delivery_completeness(self, tmp_path):
        """Every scheduled stimulus at or before end shows up exactly once."""
        rng = random.Random(13)
        scenario = random_scenario(rng, count=35)
        report = run_scenario(scenario, make_config(tmp_path))
        delivery_kinds = {
            "POWER_ON",
            "POWER_OFF",
            "KEY_PRESS",
            "SCAN",
            "MAT_LOAD",
            "MAT_UNLOAD",
            "MAT_WIRE",
            "ALARM_RESET",
        }
        delivered = [e for e in report.events if e.kind in delivery_kinds]
        assert len(delivered) == len(scenario.stimuli)


class TestAudit:
    def test_empty_event_list_writes_only_summary(self, tmp_path):
        report = Report(
            scenario="empty",
            config_digest="0" * 64,
            events=(),
            summary={},
            alarm_latched=False,
        )
        path = tmp_path / "audit.log"
        write_audit(report, path)
        assert path.read_bytes() == b"SUMMARY\talarm_latched=false\n"

    def test_line_format_is_tab_separated_lf(self, tmp_path):
        report = run_scenario(
            parse_scenario(load_canonical("mat_fault.scn")), make_config(tmp_path)
        )
        path = tmp_path / "audit.log"
        write_audit(report, path)
        raw = path.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode("utf-8").splitlines()
        assert lines[-1].startswith("SUMMARY\t")
        for line in lines[:-1]:
            ms, source, kind, detail = line.split("\t")
            assert ms.isdigit()

    def test_two_runs_byte_identical(self, tmp_path):
        scenario = parse_scenario(load_canonical("intrusion.scn"))
        cfg = make_config(tmp_path)
        a, b = tmp_path / "a.log", tmp_path / "b.log"
        write_audit(run_scenario(scenario, cfg), a)
        write_audit(run_scenario(scenario, cfg), b)
        assert a.read_bytes() == b.read_bytes()

    def test_random_scenario_run_twice_identical(self, tmp_path):
        rng = random.Random(77)
        scenario = random_scenario(rng, count=50)
        cfg = make_config(tmp_path)
        first = audit_lines(run_scenario(scenario, cfg))
        second = audit_lines(run_scenario(scenario, cfg))
        assert first == second

    def test_tab_rejected_at_event_creation_not_write_time(self):
        with pytest.raises(ValueError):
            SimEvent(at=0, source="x", kind="K", detail="a\tb")


class TestFailUnlocked:
    def test_power_off_implies_unlocked_at_every_instant(self, tmp_path):
        rng = random.Random(55)
        for i in range(25):
            scenario = random_scenario(rng, count=20, name=f"sweep{i}")
            sim = build_simulation(make_config(tmp_path))

            def probe(engine, sim=sim):
                if not engine.power_on:
                    assert sim.access.maglock_state() is LockState.UNLOCKED
                if sim.access.mode is Mode.GRANTED:
                    assert sim.access.grant_expires_at is not None

            sim.engine.step_listeners.append(probe)
            for stimulus in scenario.stimuli:
                sim.engine.schedule(stimulus)
            sim.engine.run_until(scenario.end_ms)


class TestStoreFailures:
    def test_corrupt_store_aborts_run_with_store_error(self, tmp_path):
        cfg = make_config(tmp_path)
        (tmp_path / "credentials.store").write_text("garbage\n", encoding="utf-8")
        with pytest.raises(StoreError):
            run_scenario(parse_scenario("at 0 power on\nend 10\n"), cfg)
