"""Scenario DSL: grammar, error reporting, round-trip serialization."""

from __future__ import annotations

import random

import pytest

from saferoom.access import Key, KeyPress, KeypadSide
from saferoom.detector import Scan
from saferoom.engine import SetPower
from saferoom.errors import ParseError
from saferoom.mat import ClearLoad, SetLoad, SetWire
from saferoom.scenario import Scenario, parse_scenario, serialize_scenario

from conftest import random_scenario


class TestGrammar:
    def test_minimal_scenario(self):
        sc = parse_scenario("scenario demo\nend 100\n")
        assert sc.name == "demo"
        assert sc.end_ms == 100
        assert sc.stimuli == ()

    def test_keypad_press_maps_to_access_controller(self):
        sc = parse_scenario("at 100 keypad outside press 4\nend 200\n")
        (stim,) = sc.stimuli
        assert stim.at == 100
        assert stim.target == "access"
        assert stim.action == KeyPress(Key.D4, KeypadSide.OUTSIDE)

    def test_bounce_options_parsed(self):
        sc = parse_scenario("at 100 keypad inside press 4 bounce 3 2\nend 200\n")
        (stim,) = sc.stimuli
        assert stim.action == KeyPress(Key.D4, KeypadSide.INSIDE, 3, 2)

    def test_all_verbs(self):
        text = (
            "scenario full\n"
            "at 0 power on\n"
            "at 1 detector target mass=8 distance=2\n"
            "at 2 mat load 70\n"
            "at 3 mat unload\n"
            "at 4 mat wire 2 open\n"
            "at 5 alarm reset\n"
            "at 6 keypad outside press OPEN\n"
            "at 7 power off\n"
            "end 10\n"
        )
        sc = parse_scenario(text)
        actions = [s.action for s in sc.stimuli]
        assert actions[0] == SetPower(on=True)
        assert actions[1] == Scan(8.0, 2.0)
        assert actions[2] == SetLoad(70.0)
        assert actions[3] == ClearLoad()
        assert actions[4] == SetWire(2, intact=False)
        assert actions[6] == KeyPress(Key.OPEN, KeypadSide.OUTSIDE)

    def test_comments_and_blanks_ignored(self):
        sc = parse_scenario("# header\n\nat 5 power on  # inline\n\nend 10\n")
        assert len(sc.stimuli) == 1

    def test_stimuli_sorted_stable_by_time(self):
        text = (
            "at 50 mat load 1\n"
            "at 10 power on\n"
            "at 50 mat load 2\n"
            "end 100\n"
        )
        sc = parse_scenario(text)
        assert [s.at for s in sc.stimuli] == [10, 50, 50]
        assert sc.stimuli[1].action == SetLoad(1.0)  # line order preserved at ties
        assert sc.stimuli[2].action == SetLoad(2.0)


class TestParseErrors:
    def err(self, text):
        with pytest.raises(ParseError) as info:
            parse_scenario(text)
        return info.value

    def test_comments_only_missing_end(self):
        exc = self.err("# nothing here\n# still nothing\n")
        assert "missing 'end'" in exc.reason

    def test_empty_input_missing_end(self):
        exc = self.err("")
        assert exc.line == 1

    def test_unknown_verb_cites_line(self):
        exc = self.err("at 100 frobnicate\nend 200\n")
        assert exc.line == 1
        assert "frobnicate" in exc.reason

    def test_bad_number(self):
        exc = self.err("at ten power on\nend 100\n")
        assert exc.line == 1 and "integer" in exc.reason

    def test_stimulus_after_end(self):
        exc = self.err("end 100\nat 5 power on\n")
        assert exc.line == 2 and "after 'end'" in exc.reason

    def test_stimulus_past_end_time(self):
        exc = self.err("at 500 power on\nend 100\n")
        assert exc.line == 1 and "after end" in exc.reason

    def test_duplicate_end(self):
        exc = self.err("end 100\nend 100\n")
        assert exc.line == 2

    def test_bad_wire_index(self):
        exc = self.err("at 0 mat wire 9 open\nend 10\n")
        assert "1..4" in exc.reason

    def test_negative_load(self):
        exc = self.err("at 0 mat load -5\nend 10\n")
        assert "non-negative" in exc.reason

    def test_bad_key(self):
        exc = self.err("at 0 keypad inside press Q\nend 10\n")
        assert "unknown key" in exc.reason

    def test_bad_bounce(self):
        exc = self.err("at 0 keypad inside press 4 bounce 0 2\nend 10\n")
        assert ">= 1" in exc.reason

    def test_detector_needs_both_fields(self):
        exc = self.err("at 0 detector target mass=8\nend 10\n")
        assert "detector target" in exc.reason


class TestRoundTrip:
    def test_canonical_text_round_trip(self):
        text = (
            "scenario demo\n"
            "at 0 power on\n"
            "at 5 keypad inside press 4 bounce 3 2\n"
            "at 9 detector target mass=8.0 distance=2.0\n"
            "end 10\n"
        )
        sc = parse_scenario(text)
        assert serialize_scenario(sc) == text

    def test_random_scenarios_round_trip(self):
        rng = random.Random(17)
        for _ in range(50):
            scenario = random_scenario(rng, count=20)
            text = serialize_scenario(scenario)
            assert parse_scenario(text) == scenario

    def test_reparse_of_serialized_equals_parsed(self):
        original = (
            "at 50 mat load 1\n"
            "at 10 power on\n"
            "at 50 mat wire 3 intact\n"
            "end 90\n"
        )
        once = parse_scenario(original)
        twice = parse_scenario(serialize_scenario(once))
        assert once == twice


class TestScenarioType:
    def test_unnamed_default(self):
        assert parse_scenario("end 5\n").name == "unnamed"

    def test_equality_is_structural(self):
        a = parse_scenario("at 1 power on\nend 5\n")
        b = parse_scenario("at 1 power on\nend 5\n")
        assert a == b and isinstance(a, Scenario)
