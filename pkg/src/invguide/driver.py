"""The recursive proof strategy, driven entirely through calculus rule applications."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .calculus import (
    Premises,
    Rule,
    StabilityCall,
    State,
    Terminal,
    Trace,
    VerifierCall,
    check_trace,
    initial,
    record,
)
from .oracle.oracles import Oracle, OracleUnavailable
from .oracle.responses import Proposal
from .program.syntax import Assert, InvalidLine, Program, Property
from .program.transform import check_line, insert_placeholders, negate, renumber
from .verifier.types import Answer, Budget, Stability

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DriverParams:
    k: int = 10
    budget: Budget = field(default_factory=Budget)
    instance_timeout: float = 900.0
    repair: bool = True
    max_depth: int | None = None  # defaults to the goal's line
    reprompt: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")


@dataclass(frozen=True)
class Attempt:
    """One implication check V(P, {q}, p) issued for goal p by solve call ``call``."""

    goal: Property
    proposal: Property
    depth: int
    answer: Answer
    call: int = 0


@dataclass
class RunResult:
    outcome: str  # success | fail | unknown | timeout
    trace: Trace
    seconds: float
    attempts: list[Attempt]
    verifier_calls: int
    oracle_calls: int
    max_depth: int

    @property
    def proposals(self) -> int:
        return len(self.attempts)


class _Timeout(Exception):
    pass


def prepare(program: Program, property_line: int | None = None) -> tuple[Program, Property]:
    """Canonical marked program and its goal.

    ``property_line`` uses the input program's numbering; without it the
    program must contain exactly one assertion.
    """
    asserts = program.asserts()
    if property_line is not None:
        chosen = [a for a in asserts if a.line == property_line]
        if not chosen:
            raise ValueError(f"no assertion on line {property_line}")
    elif len(asserts) == 1:
        chosen = asserts
    elif not asserts:
        raise ValueError("the program has no assertion to prove")
    else:
        raise ValueError("several assertions; choose one by line")
    marked = insert_placeholders(program)
    if marked is program:
        marked = renumber(program)
    target = chosen[0]
    new_line = marked.line_for_origin(target.line)
    stmt = marked.statement_at(new_line)
    assert isinstance(stmt, Assert)
    return marked, Property(stmt.cond, new_line)


class Prover:
    def __init__(self, program: Program, goal: Property, verifier, oracle: Oracle,
                 params: DriverParams | None = None):
        self.program = program
        self.goal = goal
        self.verifier = verifier
        self.oracle = oracle
        self.params = params or DriverParams()
        self.trace = Trace(initial(program, goal))
        self.config = self.trace.initial
        self.calls: dict[tuple[tuple[Property, ...], Property], VerifierCall] = {}
        self.pool: dict[Property, list[Proposal]] = {}
        self.attempts: list[Attempt] = []
        self.verifier_calls = 0
        self.oracle_calls = 0
        self.deepest = 0
        self.solve_calls = 0
        self.deadline = 0.0

    # ------------------------------------------------------------ primitives
    def _tick(self) -> None:
        if time.monotonic() > self.deadline:
            raise _Timeout

    def V(self, assumptions: tuple[Property, ...], goal: Property) -> VerifierCall:
        self._tick()
        key = (assumptions, goal)
        if key not in self.calls:
            self.verifier_calls += 1
            verdict = self.verifier.verify(self.program, assumptions, goal)
            self.calls[key] = VerifierCall(assumptions, goal, verdict.value)
        return self.calls[key]

    def step(self, rule: Rule, premises: Premises) -> None:
        app = record(self.config, rule, premises)
        self.trace.append(app)
        self.config = app.post
        log.debug("%s -> %s", rule, app.post)

    def _oracle(self, fn, *args) -> list[Proposal]:
        self._tick()
        self.oracle_calls += 1
        try:
            found = fn(self.program, *args)
        except OracleUnavailable as exc:
            log.warning("oracle unavailable: %s", exc)
            return []
        goal = args[0]
        # the line-ordering condition is what makes recursion terminate, so it is
        # re-checked here rather than trusted to the oracle
        found = [p for p in found if p.prop.line < goal.line and p.prop != goal and self._valid(p.prop)]
        self.pool.setdefault(goal, []).extend(found)
        return found

    def _valid(self, q: Property) -> bool:
        try:
            check_line(self.program, q.line)
        except InvalidLine:
            return False
        return True

    def propose(self, p: Property) -> list[Proposal]:
        return self._oracle(self.oracle.propose, p)

    def repair(self, p: Property, q: Property, verdict: Answer) -> list[Proposal]:
        if not self.params.repair:
            return []
        return self._oracle(self.oracle.repair, p, q, verdict)

    # ------------------------------------------------------------ navigation
    def _witness_for(self, goal: Property) -> Proposal:
        return self.pool[goal][0]

    def _unwind_to(self, length: int) -> None:
        """Backtrack until the trail has ``length`` elements."""
        while len(self.config.trail) > length:
            s: State = self.config
            last = s.trail[-1]
            premise = self.V((), last)
            self.step(Rule.BACKTRACK, Premises((premise,), self._witness_for(s.trail[-2])))

    def enter(self, level: int, p: Property, q: Proposal) -> None:
        """Reach ``<{q}, T.p>`` where ``T.p`` has ``level`` elements."""
        s: State = self.config
        if len(s.trail) == level:
            if s.assumption is None:
                self.step(Rule.PROPOSE, Premises((self.V((), p),), q))
                return
            a = s.assumption
            current = self.V((a,), p)
            o = q.origin
            if o.kind == "repair" and o.failed == a and o.verdict == Answer.UNKNOWN.value:
                self.step(Rule.REPAIR1, Premises((current,), q))
            else:
                self.step(Rule.PROPOSE, Premises((current,), q))
            return
        if len(s.trail) == level + 1 and s.assumption is None:
            last = s.trail[-1]
            call = self.V((), last)
            o = q.origin
            if (call.answer is Answer.FALSE and o.kind == "repair" and o.failed == last
                    and o.verdict == Answer.FALSE.value):
                self.step(Rule.REPAIR2, Premises((call,), q))
                return
        self._unwind_to(level + 1)
        self.step(Rule.BACKTRACK, Premises((self.V((), self.config.trail[-1]),), q))

    def _restore(self, level: int, p: Property, q: Proposal, implied: VerifierCall) -> None:
        """Return to ``<{}, T.p.q>`` so the case-split rule can fire."""
        s: State = self.config
        if s.assumption is None and len(s.trail) == level + 1 and s.trail[-1] == q.prop:
            return
        self._unwind_to(level + 1)
        self.step(Rule.BACKTRACK, Premises((self.V((), self.config.trail[-1]),), q))
        self.step(Rule.DECIDE, Premises((implied,)))

    # ------------------------------------------------------------ the procedure
    def solve(self, p: Property, depth: int) -> str:
        self.deepest = max(self.deepest, depth)
        invocation = self.solve_calls
        self.solve_calls += 1
        level = depth + 1
        max_depth = self.params.max_depth if self.params.max_depth is not None else self.goal.line
        d = self.V((), p)
        if d.answer is Answer.FALSE:
            if len(self.config.trail) == 1:
                self.step(Rule.FAIL, Premises((d,)))
            return "fail"
        if d.answer is Answer.TRUE:
            self.step(Rule.SUCC1, Premises((d,)))
            return "success"
        if depth > max_depth:
            return "unknown"
        queue = self.propose(p)
        attempted: set[Property] = set()
        i = 0
        while i < self.params.k:
            if not queue:
                if not self.params.reprompt:
                    break
                queue = [x for x in self.propose(p) if x.prop not in attempted]
                if not queue:
                    break
            q = queue.pop(0)
            if q.prop in attempted:
                continue
            attempted.add(q.prop)
            i += 1
            self.enter(level, p, q)
            e = self.V((q.prop,), p)
            self.attempts.append(Attempt(p, q.prop, depth, e.answer, invocation))
            if e.answer is Answer.FALSE:
                if len(self.config.trail) == 1:
                    self.step(Rule.FAIL, Premises((e,)))
                return "fail"
            if e.answer is Answer.TRUE:
                self.step(Rule.DECIDE, Premises((e,)))
                f = self.solve(q.prop, depth + 1)
                if f == "success":
                    return "success"
                self._tick()
                stable = self.verifier.check_stable(self.program, q.prop)
                if stable.value is Stability.STABLE:
                    flipped = self.V((negate(q.prop),), p)
                    if flipped.answer is Answer.TRUE:
                        self._restore(level, p, q, e)
                        self.step(Rule.SUCC2, Premises((e, flipped), None, StabilityCall(q.prop, stable.value)))
                        return "success"
                if f == "fail":
                    queue = self.repair(p, q.prop, Answer.FALSE) + queue
                continue
            queue = self.repair(p, q.prop, Answer.UNKNOWN) + queue
        return "unknown"

    def run(self) -> RunResult:
        start = time.monotonic()
        self.deadline = start + self.params.instance_timeout
        try:
            outcome = self.solve(self.goal, 0)
            if outcome in ("success", "fail") and self.trace.final is not Terminal(outcome):
                raise AssertionError(f"outcome {outcome} without the matching terminal rule")
        except _Timeout:
            outcome = "timeout"
        self.trace.outcome = outcome
        return RunResult(outcome, self.trace, time.monotonic() - start, self.attempts,
                         self.verifier_calls, self.oracle_calls, self.deepest)


def prove(program: Program, goal: Property, verifier, oracle: Oracle,
          params: DriverParams | None = None, certify: bool = False) -> RunResult:
    result = Prover(program, goal, verifier, oracle, params).run()
    if certify and result.outcome in ("success", "fail"):
        check_trace(result.trace, verifier)
    return result
