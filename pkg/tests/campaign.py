"""One fuzzing run: random program, adversarial oracle, some verifier, then an audit."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from bruteforce import TooLarge, holds
from generators import DegradingVerifier, adversarial_oracle, random_program
from invguide.calculus import CertificateFailure, Rule, Terminal
from invguide.driver import DriverParams, RunResult, prepare, prove
from invguide.program import Property
from invguide.verifier import Budget, BuiltinVerifier, CachedVerifier

K = 4
BUDGET = Budget(max_states=20_000, max_seconds=5)
FLAVORS = ("explicit", "kinduction", "degraded")


@dataclass
class Case:
    seed: int
    flavor: str
    outcome: str = "skipped"
    truth: bool | None = None
    depth: int = 0
    goal_line: int = 0
    repair: bool = True
    violations: list[str] = field(default_factory=list)

    @property
    def discrepancy(self) -> bool:
        return (self.outcome == "success" and self.truth is False) or (self.outcome == "fail" and self.truth is True)


def make_verifier(flavor: str, seed: int):
    inner = BuiltinVerifier("kinduction" if flavor == "kinduction" else "explicit", BUDGET)
    return CachedVerifier(DegradingVerifier(inner, seed) if flavor == "degraded" else inner)


def audit(result: RunResult, goal: Property, k: int, repair: bool) -> list[str]:
    found = []
    if result.outcome not in ("success", "fail", "unknown", "timeout"):
        found.append(f"outcome {result.outcome!r}")
    if result.max_depth > goal.line:
        found.append(f"depth {result.max_depth} exceeds goal line {goal.line}")
    per_call = Counter(a.call for a in result.attempts)
    if per_call and max(per_call.values()) > k:
        found.append(f"{max(per_call.values())} implication checks for one goal, k={k}")
    seen = set()
    for a in result.attempts:
        if a.proposal.line >= a.goal.line:
            found.append(f"proposal {a.proposal} not above goal {a.goal}")
        if (a.call, a.proposal) in seen:
            found.append(f"proposal {a.proposal} attempted twice for one goal")
        seen.add((a.call, a.proposal))
    final = result.trace.final
    if result.outcome in ("success", "fail") and final is not Terminal(result.outcome):
        found.append(f"outcome {result.outcome} but trace ends in {final}")
    if result.outcome in ("unknown", "timeout") and isinstance(final, Terminal):
        found.append(f"outcome {result.outcome} but trace ends in {final}")
    if not repair and {Rule.REPAIR1, Rule.REPAIR2} & {s.rule for s in result.trace.steps}:
        found.append("repair rule applied in repair-free mode")
    return found


def run_case(seed: int, repair: bool = True, limit: int = 400_000) -> Case:
    inst = random_program(seed)
    case = Case(seed, FLAVORS[seed % len(FLAVORS)], repair=repair)
    original = inst.program.asserts()[0]
    try:
        case.truth = holds(inst.program, (), Property(original.cond, original.line), limit)
    except TooLarge:
        return case
    program, goal = prepare(inst.program)
    case.goal_line = goal.line
    params = DriverParams(k=K, budget=BUDGET, instance_timeout=60, repair=repair)
    try:
        result = prove(program, goal, make_verifier(case.flavor, seed), adversarial_oracle(seed), params,
                       certify=True)
    except CertificateFailure as exc:
        case.outcome = "uncertified"
        case.violations.append(f"certificate: {exc}")
        return case
    case.outcome = result.outcome
    case.depth = result.max_depth
    case.violations = audit(result, goal, K, repair)
    return case
