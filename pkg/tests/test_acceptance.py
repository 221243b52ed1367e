"""The seven acceptance criteria. Each test records one PASS/FAIL line, shown in the terminal summary."""

from __future__ import annotations

import itertools
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor

import pytest

from bruteforce import holds, stable
from campaign import run_case
from helpers import (
    ACCEPTANCE,
    BOTTOM_ROW_SCRIPT,
    EXACT_CORPUS,
    FIG2,
    TOP_ROW_SCRIPT,
    fixture_text,
    prop,
    write_toy_corpus,
)
from invguide.bench import COLUMNS, log2_bucket, run_suite
from invguide.calculus import Rule, load_trace
from invguide.config import Settings
from invguide.driver import prepare, prove
from invguide.oracle import build_propose_prompt, parse_response, rank_and_dedup
from invguide.oracle.oracles import ScriptedOracle
from invguide.program import Property, negate, parse, parse_property, print_expr
from invguide.verifier import Answer, Budget, BuiltinVerifier, CachedVerifier, Stability, explicit, kinduction
from succ2 import derive

FUZZ_PROGRAMS = 500
FUZZ_SECONDS = 600


def report(number: int, name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE.append(f"criterion {number} {'PASS' if ok else 'FAIL'}: {name}: {detail}")
    assert ok, detail


def test_1_running_example_replay():
    program, goal = prepare(parse(FIG2))
    assert program.width == 8
    start = time.monotonic()
    top = prove(program, goal, CachedVerifier(BuiltinVerifier("kinduction")), ScriptedOracle(TOP_ROW_SCRIPT),
                certify=True)
    seconds = time.monotonic() - start
    bottom = prove(program, goal, CachedVerifier(BuiltinVerifier("kinduction")), ScriptedOracle(BOTTOM_ROW_SCRIPT),
                   certify=True)
    rules = bottom.trace.rules
    backtracks_after_decide = "Decide" in rules and "Backtrack" in rules[rules.index("Decide"):]
    ok = (top.outcome == "success" and top.trace.rules == ["Propose", "Repair1", "Decide", "Succ1"]
          and seconds < 5 and bottom.outcome == "success" and backtracks_after_decide)
    report(1, "running example", ok,
           f"top {top.outcome} {top.trace.rules} in {seconds:.2f}s; bottom {bottom.outcome} {rules}")


@pytest.fixture(scope="module")
def campaign():
    start = time.monotonic()
    cases, seed = [], 0
    with ProcessPoolExecutor(max_workers=min(8, os.cpu_count() or 1)) as pool:
        while (short := FUZZ_PROGRAMS - sum(c.truth is not None for c in cases)) > 0:
            cases.extend(pool.map(run_case, range(seed, seed + short)))
            seed += short
    return cases, time.monotonic() - start


def test_2_soundness_fuzzing(campaign):
    cases, seconds = campaign
    checked = [c for c in cases if c.truth is not None]
    bad = [c.seed for c in checked if c.discrepancy or c.outcome == "uncertified"]
    outcomes = Counter(c.outcome for c in checked)
    ok = len(checked) >= FUZZ_PROGRAMS and not bad and seconds < FUZZ_SECONDS
    report(2, "soundness fuzzing", ok,
           f"{len(checked)} programs ({len(cases) - len(checked)} too large to enumerate, skipped), "
           f"outcomes {dict(sorted(outcomes.items()))}, discrepancies {bad}, {seconds:.0f}s")


def test_3_termination_and_budgets(campaign):
    cases, _ = campaign
    checked = [c for c in cases if c.truth is not None]
    violations = [(c.seed, v) for c in checked for v in c.violations]
    timeouts = [c.seed for c in checked if c.outcome == "timeout"]
    depths = Counter(c.depth for c in checked)
    ok = not violations and not timeouts
    report(3, "termination and budgets", ok,
           f"{len(checked)} runs, depth histogram {dict(sorted(depths.items()))}, "
           f"timeouts {timeouts}, audit violations {violations[:5]}")


def test_4_case_split():
    inst = derive()
    program, goal, q = inst.program, inst.goal, inst.split
    brute = stable(program, q) and not holds(program, (), q) and holds(program, (q,), goal) \
        and holds(program, (negate(q),), goal)
    oracle = ScriptedOracle({"propose": {print_expr(goal.predicate): [f"assert({print_expr(q.predicate)}); // Line A"]}})
    verifier = CachedVerifier(BuiltinVerifier("explicit", Budget(max_states=inst.budget)))
    result = prove(program, goal, verifier, oracle, certify=True)
    step = next((s for s in result.trace.steps if s.rule is Rule.SUCC2), None)
    premises_ok = False
    if step is not None:
        calls = {(c.assumptions, c.goal): c.answer for c in step.premises.verdicts}
        premises_ok = (calls.get(((q,), goal)) is Answer.TRUE and calls.get(((negate(q),), goal)) is Answer.TRUE
                       and step.premises.stability is not None and step.premises.stability.prop == q
                       and step.premises.stability.result is Stability.STABLE)
    ok = brute and result.outcome == "success" and premises_ok
    report(4, "case split", ok,
           f"split {q} at budget {inst.budget} (states {inst.states}); brute force {brute}; "
           f"{result.outcome} {result.trace.rules}; premises recorded {premises_ok}")


def test_5_prompt_and_parse_fidelity():
    f1 = parse(fixture_text("f1_program.c"), width=32)
    a = f1.asserts()[0]
    prompt, markers = build_propose_prompt(f1, Property(a.cond, a.line))
    same_prompt = prompt == fixture_text("f1_prompt.txt")
    goals1 = rank_and_dedup(parse_response(fixture_text("f1_outputs.txt"), markers, f1))
    f2 = parse(fixture_text("f2_program.c"), width=32)
    goals2 = rank_and_dedup(parse_response(fixture_text("f2_outputs.txt"), {}, f2, fixed_line=f2.markers["A"]))
    first = goals1[0].prop if goals1 else None
    ok = same_prompt and len(goals1) == 6 and first == parse_property("i <= n", 10, f1) and len(goals2) == 4
    report(5, "prompt and parse fidelity", ok,
           f"propose prompt identical {same_prompt}; {len(goals1)} goals, first {goals1[0].printed!r}; "
           f"{len(goals2)} repaired goals")


def test_6_verifier_exactness():
    mismatches, queries, unsound = [], 0, []
    start = time.monotonic()
    for source, texts in EXACT_CORPUS:
        program = parse(source)
        props = [prop(program, t) for t in texts]
        for goal in props:
            for size in range(3):
                for assumptions in itertools.combinations(props, size):
                    queries += 1
                    truth = Answer.TRUE if holds(program, assumptions, goal) else Answer.FALSE
                    if explicit.verify(program, assumptions, goal).value is not truth:
                        mismatches.append((source, goal, assumptions))
                    if kinduction.verify(program, assumptions, goal).value not in (truth, Answer.UNKNOWN):
                        unsound.append((source, goal, assumptions))
                    tiny = Budget(max_states=1)
                    for engine in (explicit, kinduction):
                        if engine.verify(program, assumptions, goal, tiny).value is not Answer.UNKNOWN:
                            mismatches.append(("1-state budget", source, goal))
    ok = len(EXACT_CORPUS) == 20 and not mismatches and not unsound
    report(6, "verifier exactness", ok,
           f"{len(EXACT_CORPUS)} programs, {queries} queries, {len(mismatches)} mismatches, "
           f"{len(unsound)} unsound k-induction answers, {time.monotonic() - start:.0f}s")


def test_7_report_schema(tmp_path):
    corpus = write_toy_corpus(tmp_path / "toy")
    settings = Settings(engine="kinduction")
    out = tmp_path / "results.csv"
    reports = run_suite(corpus, settings, out=out)
    header = out.read_text().splitlines()[0].split(",")
    columns_ok = tuple(header) == COLUMNS and {"Solved", "Time", "#proposals", "log2_bucket"} <= set(header)
    buckets_ok = all(log2_bucket(r.proposals) == r.row()["log2_bucket"] for r in reports)
    free = run_suite(corpus, Settings(engine="kinduction", repair=False), out=tmp_path / "free.csv")
    repairs = sum(s.rule in (Rule.REPAIR1, Rule.REPAIR2)
                  for r in free if r.trace_path for s in load_trace(r.trace_path).steps)
    with_repairs = sum(s.rule in (Rule.REPAIR1, Rule.REPAIR2)
                       for r in reports if r.trace_path for s in load_trace(r.trace_path).steps)
    ok = len(reports) == 6 and columns_ok and buckets_ok and repairs == 0 and with_repairs > 0
    report(7, "report schema", ok,
           f"{len(reports)} rows, columns {columns_ok}, buckets {buckets_ok}, "
           f"repairs with/without repair mode {with_repairs}/{repairs}")
