from __future__ import annotations

import json
import os

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import TOP_ROW_SCRIPT, fixture_text, prop
from invguide.oracle import (
    CallbackOracle,
    LiveOracle,
    OracleConfig,
    OracleUnavailable,
    ReplayOracle,
    ScriptedOracle,
    build_propose_prompt,
    build_repair_prompt,
    make_oracle,
)
from invguide.oracle.prompts import NoMarkers, visible_markers
from invguide.oracle.responses import Proposal, enforce_condition1, parse_response, rank_and_dedup
from invguide.program import Property, parse, parse_property
from invguide.program.syntax import Num
from invguide.verifier import Answer


@pytest.fixture(scope="module")
def f1():
    return parse(fixture_text("f1_program.c"), width=32)


@pytest.fixture(scope="module")
def f2():
    return parse(fixture_text("f2_program.c"), width=32)


def goal_of(program):
    a = program.asserts()[0]
    return Property(a.cond, a.line)


def listed_goals(name):
    return [line.split(": ", 1)[1].rsplit(" after line", 1)[0] for line in fixture_text(name).splitlines()[1:]]


class TestPrompts:
    def test_propose_prompt_matches_listing(self, f1):
        prompt, markers = build_propose_prompt(f1, goal_of(f1))
        assert markers == {"A": 10}
        assert prompt == fixture_text("f1_prompt.txt")

    def test_repair_prompt_matches_listing(self, f2):
        failed = parse_property("x + z == n", f2.markers["A"], f2)
        assert build_repair_prompt(f2, goal_of(f2), failed, Answer.UNKNOWN) == fixture_text("f2_prompt.txt")

    def test_repair_wording_for_refuted(self, f2):
        failed = parse_property("x + z == n", f2.markers["A"], f2)
        text = build_repair_prompt(f2, goal_of(f2), failed, Answer.FALSE)
        assert "is incorrect." in text
        with pytest.raises(ValueError):
            build_repair_prompt(f2, goal_of(f2), failed, Answer.TRUE)

    def test_multiple_markers_wording(self, fig2_marked):
        program, goal = fig2_marked
        prompt, markers = build_propose_prompt(program, goal)
        assert markers == {"A": 2, "B": 4}
        assert "at lines A, B that" in prompt
        assert "// line name'" in prompt
        assert "facts" in prompt  # marker A sits outside the loop

    def test_only_markers_above_goal(self, fig2_marked):
        program, _ = fig2_marked
        assert visible_markers(program, prop(program, "x % 4 == 0@B")) == {"A": 2}

    def test_no_markers(self):
        p = parse("uint8_t x = 0;\nassert(x == 0);\n")
        with pytest.raises(NoMarkers):
            build_propose_prompt(p, goal_of(p))
        assert ScriptedOracle({"propose": {"x == 0": ["assert(x == 0); // Line A"]}}).propose(p, goal_of(p)) == []


class TestResponses:
    def test_propose_outputs(self, f1):
        found = rank_and_dedup(parse_response(fixture_text("f1_outputs.txt"), {"A": 10}, f1))
        expected = [parse_property(t, 10, f1) for t in listed_goals("f1_goals.txt")]
        assert [p.prop for p in found] == expected
        assert found[0].frequency == 8
        assert [p.rank for p in found] == list(range(1, 7))

    def test_repair_outputs_ignore_markers(self, f2):
        line = f2.markers["A"]
        found = rank_and_dedup(parse_response(fixture_text("f2_outputs.txt"), {}, f2, fixed_line=line))
        assert [p.prop for p in found] == [parse_property(t, line, f2) for t in listed_goals("f2_goals.txt")]

    @pytest.mark.parametrize("text", [
        "assert(x == 1) // Line A",  # no semicolon
        "assert(x == ); // Line A",  # bad expression
        "assert(q == 1); // Line A",  # unknown variable
        "assert(x == 1); // Line Z",  # unknown marker
        "assert(x == 1);",  # no marker at all
        "Sure! Here you go.",
    ])
    def test_malformed_lines_are_dropped(self, fig2_marked, text):
        program, _ = fig2_marked
        assert parse_response(text, {"A": 2}, program) == []

    def test_several_asserts_on_one_line(self, fig2_marked):
        program, _ = fig2_marked
        found = parse_response("assert(x == 1); // Line A assert(x == 2); // line b", {"A": 2, "B": 4}, program)
        assert [(p.printed, p.prop.line) for p in found] == [("x == 1", 2), ("x == 2", 4)]

    def test_nested_parentheses(self, fig2_marked):
        program, _ = fig2_marked
        [p] = parse_response("assert((x + 1) * 2 == (x % (3))); // Line A", {"A": 2}, program)
        assert p.printed == "(x + 1) * 2 == x % 3"

    def test_condition1(self, fig2_marked):
        program, goal = fig2_marked
        props = [Proposal(goal), Proposal(Property(Num(1), goal.line)), Proposal(Property(Num(1), goal.line + 1)),
                 Proposal(Property(Num(1), 2))]
        assert [p.prop.line for p in enforce_condition1(props, goal)] == [2]


PREDICATES = st.sampled_from(["x == 0", "x < 5", "x % 4 == 0", "x != 30", "0 == x", "x + 1 == 2"])


class TestRanking:
    @given(st.lists(st.tuples(PREDICATES, st.sampled_from([2, 4])), max_size=12), st.randoms())
    @settings(max_examples=100, deadline=None)
    def test_order_independent_and_counts_add(self, items, rng):
        from helpers import FIG2

        program = parse(FIG2)
        props = [Proposal(parse_property(t, line, program)) for t, line in items]
        shuffled = list(props)
        rng.shuffle(shuffled)
        a, b = rank_and_dedup(props), rank_and_dedup(shuffled)
        assert [(p.prop, p.frequency) for p in a] == [(p.prop, p.frequency) for p in b]
        assert sum(p.frequency for p in a) == len(props)
        assert len({p.prop for p in a}) == len(a)
        keys = [(-p.frequency, len(p.printed), p.printed, p.prop.line) for p in a]
        assert keys == sorted(keys)


class TestScripted:
    def test_calls_consume_entries(self, fig2_marked):
        program, goal = fig2_marked
        oracle = ScriptedOracle({"propose": {"x != 30": ["assert(x < 100); // Line A", "assert(x < 50); // Line A"]}})
        assert [p.printed for p in oracle.propose(program, goal)] == ["x < 100"]
        assert [p.printed for p in oracle.propose(program, goal)] == ["x < 50"]
        assert oracle.propose(program, goal) == []

    def test_marker_keys_beat_bare_keys(self, fig2_marked):
        program, goal = fig2_marked
        q = prop(program, "x % 2 == 0@B")
        oracle = ScriptedOracle({"repair": {
            "x != 30 | x % 2 == 0": ["assert(x == 1);"],
            "x != 30 | x % 2 == 0@B": ["assert(x % 4 == 0);"],
        }})
        [r] = oracle.repair(program, goal, q, Answer.UNKNOWN)
        assert (r.printed, r.prop.line) == ("x % 4 == 0", 4)
        assert r.origin.kind == "repair" and r.origin.failed == q and r.origin.verdict == "unknown"

    def test_bad_repair_key(self):
        with pytest.raises(ValueError):
            ScriptedOracle({"repair": {"x != 30": []}})

    def test_fingerprint_entries(self, fig2_marked):
        from invguide.oracle.oracles import fingerprint

        program, goal = fig2_marked
        fp = fingerprint("propose", program, goal)
        oracle = ScriptedOracle({"fingerprints": {fp: [["assert(x < 7); // Line A"]]}})
        assert [p.printed for p in oracle.propose(program, goal)] == ["x < 7"]

    def test_log_then_replay(self, fig2_marked, tmp_path):
        program, goal = fig2_marked
        log = tmp_path / "oracle.jsonl"
        first = ScriptedOracle(TOP_ROW_SCRIPT, log_path=log)
        q = prop(program, "x % 2 == 0@B")
        proposed = first.propose(program, goal)
        repaired = first.repair(program, goal, q, Answer.UNKNOWN)
        records = [json.loads(line) for line in log.read_text().splitlines()]
        assert {r["kind"] for r in records} == {"propose", "repair"}
        assert all(r["prompt"] and r["oracle"] == "scripted" for r in records)
        replay = ReplayOracle(log)
        assert [p.prop for p in replay.propose(program, goal)] == [p.prop for p in proposed]
        assert [p.prop for p in replay.repair(program, goal, q, Answer.UNKNOWN)] == [p.prop for p in repaired]
        assert replay.propose(program, goal) == []

    def test_make_oracle(self, tmp_path):
        script = tmp_path / "s.json"
        script.write_text(json.dumps(TOP_ROW_SCRIPT))
        assert isinstance(make_oracle(OracleConfig(), script), ScriptedOracle)
        assert isinstance(make_oracle(OracleConfig(mode="live")), LiveOracle)
        with pytest.raises(ValueError):
            make_oracle(OracleConfig(mode="replay"))
        with pytest.raises(ValueError):
            OracleConfig(mode="psychic")


class TestCallback:
    def test_properties_and_texts(self, fig2_marked):
        program, goal = fig2_marked
        q = prop(program, "x < 9@A")
        oracle = CallbackOracle(lambda p, g: [q, q, "assert(x % 4 == 0); // Line B", goal])
        found = oracle.propose(program, goal)
        assert [(p.printed, p.frequency) for p in found] == [("x < 9", 2), ("x % 4 == 0", 1)]

    def test_repair_pins_line(self, fig2_marked):
        program, goal = fig2_marked
        failed = prop(program, "x % 2 == 0@B")
        oracle = CallbackOracle(repair=lambda p, g, f, v: [prop(program, "x == 0@A")])
        [r] = oracle.repair(program, goal, failed, Answer.FALSE)
        assert r.prop.line == failed.line and r.origin.verdict == "false"


def _completion(text):
    return {"choices": [{"message": {"content": text}}]}


class TestLive:
    def test_request_shape_and_merge(self, fig2_marked, monkeypatch):
        program, goal = fig2_marked
        monkeypatch.setenv("TEST_KEY", "secret")
        seen = []

        def handler(request):
            body = json.loads(request.content)
            seen.append((request.headers["authorization"], body))
            return httpx.Response(200, json=_completion("assert(x % 4 == 0); // Line B"))

        config = OracleConfig(api_key_env="TEST_KEY", samples=3, penalties=(1.5, 2.0), model="m", mode="live")
        oracle = LiveOracle(config, client=httpx.Client(transport=httpx.MockTransport(handler)))
        [p] = oracle.propose(program, goal)
        assert p.frequency == 6
        assert len(seen) == 6
        assert {b["frequency_penalty"] for _, b in seen} == {1.5, 2.0}
        assert all(h == "Bearer secret" and b["model"] == "m" for h, b in seen)
        assert seen[0][1]["messages"][0]["content"] == build_propose_prompt(program, goal)[0]

    @pytest.mark.parametrize("handler", [
        lambda r: httpx.Response(500, text="boom"),
        lambda r: httpx.Response(200, json={"unexpected": True}),
    ])
    def test_failures_raise_unavailable(self, fig2_marked, monkeypatch, handler):
        program, goal = fig2_marked
        monkeypatch.setenv("TEST_KEY", "secret")
        config = OracleConfig(api_key_env="TEST_KEY", samples=1, penalties=(1.5,), mode="live")
        oracle = LiveOracle(config, client=httpx.Client(transport=httpx.MockTransport(handler)))
        with pytest.raises(OracleUnavailable):
            oracle.propose(program, goal)

    def test_missing_key(self, fig2_marked, monkeypatch):
        program, goal = fig2_marked
        monkeypatch.delenv("ABSENT_KEY", raising=False)
        oracle = LiveOracle(OracleConfig(api_key_env="ABSENT_KEY", samples=1, penalties=(1.0,), mode="live"))
        with pytest.raises(OracleUnavailable):
            oracle.propose(program, goal)


@pytest.mark.live
@pytest.mark.skipif(os.environ.get("INVGUIDE_LIVE") != "1", reason="set INVGUIDE_LIVE=1 to call the model")
def test_live_smoke(fig2_marked):
    program, goal = fig2_marked
    found = LiveOracle(OracleConfig(mode="live", samples=1, penalties=(1.5,))).propose(program, goal)
    assert all(p.prop.line < goal.line for p in found)
