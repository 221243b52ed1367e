"""The proof calculus: configurations, the eight rules, and trace certification.

Every rule application carries its premises as data (verifier calls, the
proposal used, a stability result), so a finished trace can be re-checked
against any verifier after the fact.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Union

from .oracle.responses import Origin, Proposal
from .program.parser import parse, parse_expr
from .program.printer import print_expr, print_program
from .program.syntax import InvalidLine, Program, Property
from .program.transform import check_line, negate
from .verifier.types import Answer, Stability


class Rule(enum.Enum):
    PROPOSE = "Propose"
    DECIDE = "Decide"
    BACKTRACK = "Backtrack"
    REPAIR1 = "Repair1"
    REPAIR2 = "Repair2"
    SUCC1 = "Succ1"
    SUCC2 = "Succ2"
    FAIL = "Fail"

    def __str__(self) -> str:
        return self.value


class Terminal(enum.Enum):
    SUCCESS = "success"
    FAIL = "fail"

    def __str__(self) -> str:
        return self.value


class InvalidProperty(ValueError):
    pass


class PreconditionViolated(ValueError):
    def __init__(self, premise: str, detail: str = ""):
        super().__init__(f"{premise}: {detail}" if detail else premise)
        self.premise = premise


class CertificateFailure(ValueError):
    def __init__(self, step: int, reason: str):
        super().__init__(f"step {step}: {reason}")
        self.step = step
        self.reason = reason


@dataclass(frozen=True)
class State:
    program: Program
    assumption: Property | None
    trail: tuple[Property, ...]

    def __post_init__(self):
        if not self.trail:
            raise ValueError("a trail is never empty")

    @property
    def goal(self) -> Property:
        return self.trail[-1]

    @property
    def assumptions(self) -> tuple[Property, ...]:
        return () if self.assumption is None else (self.assumption,)


Configuration = Union[State, Terminal]


@dataclass(frozen=True)
class VerifierCall:
    assumptions: tuple[Property, ...]
    goal: Property
    answer: Answer


@dataclass(frozen=True)
class StabilityCall:
    prop: Property
    result: Stability


@dataclass(frozen=True)
class Premises:
    verdicts: tuple[VerifierCall, ...] = ()
    proposal: Proposal | None = None
    stability: StabilityCall | None = None


@dataclass(frozen=True)
class RuleApplication:
    rule: Rule
    premises: Premises
    pre: State
    post: Configuration


def initial(program: Program, p0: Property) -> State:
    try:
        check_line(program, p0.line)
    except InvalidLine as exc:
        raise InvalidProperty(str(exc)) from exc
    return State(program, None, (p0,))


def _find(premises: Premises, assumptions_options: Iterable[tuple[Property, ...]], goal: Property,
          accept: Callable[[Answer], bool]) -> VerifierCall | None:
    options = [tuple(a) for a in assumptions_options]
    for call in premises.verdicts:
        if call.goal == goal and call.assumptions in options and accept(call.answer):
            return call
    return None


def _require(cond: bool, premise: str, detail: str = "") -> None:
    if not cond:
        raise PreconditionViolated(premise, detail)


def _proposal_for(premises: Premises, rule: str, goal: Property) -> Property:
    p = premises.proposal
    _require(p is not None, f"{rule}.proposal", "no proposal recorded")
    _require(p.origin is not None and p.origin.goal == goal, f"{rule}.proposal",
             f"proposal {p.prop} was not made for goal {goal}")
    return p.prop


def apply(config: Configuration, rule: Rule, premises: Premises) -> Configuration:
    """The conclusion of ``rule`` from ``config``, or PreconditionViolated."""
    _require(isinstance(config, State), f"{rule}.state", "terminal configurations have no successors")
    s: State = config
    P, A, T = s.program, s.assumption, s.trail
    p = T[-1]
    is_ = lambda value: (lambda a: a is value)  # noqa: E731

    if rule is Rule.PROPOSE:
        _require(_find(premises, [s.assumptions], p, is_(Answer.UNKNOWN)) is not None,
                 "Propose.unknown", f"no Unknown verdict for {p} under the current assumption")
        q = _proposal_for(premises, "Propose", p)
        return State(P, q, T)

    if rule is Rule.DECIDE:
        _require(A is not None, "Decide.assumption", "assumption set is empty")
        _require(_find(premises, [(A,)], p, is_(Answer.TRUE)) is not None,
                 "Decide.implies", f"no True verdict for {A} implying {p}")
        return State(P, None, T + (A,))

    if rule is Rule.BACKTRACK:
        _require(len(T) >= 2, "Backtrack.trail", "trail has a single element")
        _require(_find(premises, [s.assumptions, ()], p, lambda a: a is not Answer.TRUE) is not None,
                 "Backtrack.not_proved", f"no non-True verdict recorded for {p}")
        q = _proposal_for(premises, "Backtrack", T[-2])
        return State(P, q, T[:-1])

    if rule is Rule.REPAIR1:
        _require(A is not None, "Repair1.assumption", "assumption set is empty")
        _require(_find(premises, [(A,)], p, is_(Answer.UNKNOWN)) is not None,
                 "Repair1.unknown", f"no Unknown verdict for {A} implying {p}")
        q = _proposal_for(premises, "Repair1", p)
        origin = premises.proposal.origin
        _require(origin.kind == "repair" and origin.failed == A and origin.verdict == Answer.UNKNOWN.value,
                 "Repair1.proposal", "proposal is not a repair of the current assumption")
        return State(P, q, T)

    if rule is Rule.REPAIR2:
        _require(A is None, "Repair2.assumption", "assumption set is not empty")
        _require(len(T) >= 2, "Repair2.trail", "trail has a single element")
        _require(_find(premises, [()], p, is_(Answer.FALSE)) is not None,
                 "Repair2.false", f"no False verdict for {p}")
        q = _proposal_for(premises, "Repair2", T[-2])
        origin = premises.proposal.origin
        _require(origin.kind == "repair" and origin.failed == p and origin.verdict == Answer.FALSE.value,
                 "Repair2.proposal", "proposal is not a repair of the refuted goal")
        return State(P, q, T[:-1])

    if rule is Rule.SUCC1:
        _require(A is None, "Succ1.assumption", "assumption set is not empty")
        _require(_find(premises, [()], p, is_(Answer.TRUE)) is not None,
                 "Succ1.proved", f"no True verdict for {p}")
        return Terminal.SUCCESS

    if rule is Rule.SUCC2:
        _require(A is None, "Succ2.assumption", "assumption set is not empty")
        _require(len(T) >= 2, "Succ2.trail", "trail has a single element")
        st = premises.stability
        _require(st is not None and st.prop == p and st.result is Stability.STABLE,
                 "Succ2.stable", f"{p} is not recorded as stable")
        _require(_find(premises, [(p,)], T[-2], is_(Answer.TRUE)) is not None,
                 "Succ2.implies", f"no True verdict for {p} implying {T[-2]}")
        _require(_find(premises, [(negate(p),)], T[-2], is_(Answer.TRUE)) is not None,
                 "Succ2.negation", f"no True verdict for the negation of {p} implying {T[-2]}")
        return Terminal.SUCCESS

    if rule is Rule.FAIL:
        _require(len(T) == 1, "Fail.trail", "only the original property can fail")
        _require(_find(premises, [s.assumptions, ()], p, is_(Answer.FALSE)) is not None,
                 "Fail.false", f"no False verdict for {p}")
        return Terminal.FAIL

    raise ValueError(f"unknown rule {rule!r}")


def record(config: State, rule: Rule, premises: Premises) -> RuleApplication:
    return RuleApplication(rule, premises, config, apply(config, rule, premises))


def applicable(state: State, verdict: Callable[[tuple[Property, ...], Property], Answer],
               stable: Callable[[Property], Stability],
               proposal: Callable[[Rule], Proposal | None]) -> set[Rule]:
    """Rules whose premises hold given a verdict function, a stability
    function and the proposal (if any) available for each rule."""
    p = state.goal
    calls = [VerifierCall(state.assumptions, p, verdict(state.assumptions, p))]
    if state.assumptions:
        calls.append(VerifierCall((), p, verdict((), p)))
    if len(state.trail) >= 2:
        prev = state.trail[-2]
        calls.append(VerifierCall((p,), prev, verdict((p,), prev)))
        calls.append(VerifierCall((negate(p),), prev, verdict((negate(p),), prev)))
    out = set()
    for rule in Rule:
        st = StabilityCall(p, stable(p)) if rule is Rule.SUCC2 else None
        try:
            apply(state, rule, Premises(tuple(calls), proposal(rule), st))
        except PreconditionViolated:
            continue
        out.add(rule)
    return out


# ---------------------------------------------------------------- traces


@dataclass
class Trace:
    initial: State
    steps: list[RuleApplication] = field(default_factory=list)
    outcome: str = "unknown"  # success | fail | unknown | timeout

    @property
    def final(self) -> Configuration:
        return self.steps[-1].post if self.steps else self.initial

    @property
    def rules(self) -> list[str]:
        return [str(a.rule) for a in self.steps]

    def append(self, application: RuleApplication) -> None:
        if application.pre != self.final:
            raise ValueError("rule applications must chain")
        self.steps.append(application)


@dataclass(frozen=True)
class Certificate:
    outcome: str
    steps: int
    replayed_calls: int


def check_trace(trace: Trace, verifier) -> Certificate:
    """Re-run every recorded verdict, re-apply every rule, and re-derive the
    implication chain along the trail."""
    config: Configuration = trace.initial
    if not isinstance(config, State) or config.assumption is not None or len(config.trail) != 1:
        raise CertificateFailure(0, "a trace starts from the empty assumption and a one-element trail")
    program = config.program
    witnessed: set[tuple[Property, Property]] = set()  # (stronger, weaker) with a True verdict
    replayed = 0
    for i, app in enumerate(trace.steps, start=1):
        if app.pre != config:
            raise CertificateFailure(i, "rule application does not start where the last one ended")
        if app.pre.program != program:
            raise CertificateFailure(i, "the program changed")
        for call in app.premises.verdicts:
            again = verifier.verify(program, call.assumptions, call.goal).value
            replayed += 1
            if again is not call.answer:
                raise CertificateFailure(i, f"verdict for {call.goal} under {[str(a) for a in call.assumptions]} "
                                            f"replays as {again}, recorded {call.answer}")
            if call.answer is Answer.TRUE and len(call.assumptions) == 1:
                witnessed.add((call.assumptions[0], call.goal))
        if app.premises.stability is not None:
            st = app.premises.stability
            again = verifier.check_stable(program, st.prop).value
            if again is not st.result:
                raise CertificateFailure(i, f"stability of {st.prop} replays as {again}")
        try:
            post = apply(app.pre, app.rule, app.premises)
        except PreconditionViolated as exc:
            raise CertificateFailure(i, f"{app.rule} premise failed: {exc}") from exc
        if post != app.post:
            raise CertificateFailure(i, f"{app.rule} conclusion differs from the recorded one")
        if isinstance(post, State):
            for weaker, stronger in zip(post.trail, post.trail[1:]):
                if (stronger, weaker) not in witnessed:
                    raise CertificateFailure(i, f"no recorded verdict shows {stronger} implies {weaker}")
        config = post
    outcome = str(config) if isinstance(config, Terminal) else "unknown"
    if trace.outcome in ("success", "fail") and trace.outcome != outcome:
        raise CertificateFailure(len(trace.steps), f"trace claims {trace.outcome}, rules reach {outcome}")
    return Certificate(outcome, len(trace.steps), replayed)


# ---------------------------------------------------------------- serialization


def _prop_json(p: Property | None):
    return None if p is None else {"pred": print_expr(p.predicate), "line": p.line}


def _prop_load(d, program: Program) -> Property | None:
    return None if d is None else Property(parse_expr(d["pred"], program), d["line"])


def _config_json(c: Configuration):
    if isinstance(c, Terminal):
        return {"terminal": c.value}
    return {"assumption": _prop_json(c.assumption), "trail": [_prop_json(p) for p in c.trail]}


def _config_load(d, program: Program) -> Configuration:
    if "terminal" in d:
        return Terminal(d["terminal"])
    return State(program, _prop_load(d["assumption"], program), tuple(_prop_load(p, program) for p in d["trail"]))


def _proposal_json(p: Proposal | None):
    if p is None:
        return None
    o = p.origin
    return {
        "prop": _prop_json(p.prop), "frequency": p.frequency, "source": p.source, "raw": p.raw,
        "prompt_id": p.prompt_id, "rank": p.rank,
        "origin": None if o is None else {
            "kind": o.kind, "goal": _prop_json(o.goal), "failed": _prop_json(o.failed), "verdict": o.verdict,
        },
    }


def _proposal_load(d, program: Program) -> Proposal | None:
    if d is None:
        return None
    o = d["origin"]
    origin = None if o is None else Origin(o["kind"], _prop_load(o["goal"], program),
                                           _prop_load(o["failed"], program), o["verdict"])
    return Proposal(_prop_load(d["prop"], program), d["frequency"], d["source"], d["raw"],
                    d["prompt_id"], d["rank"], origin)


def dump_trace(trace: Trace, path: str | Path, extra: dict | None = None) -> None:
    program = trace.initial.program
    lines = [{
        "type": "header", "program": print_program(program), "width": program.width,
        "goal": _prop_json(trace.initial.goal), **(extra or {}),
    }]
    for app in trace.steps:
        lines.append({
            "type": "step", "rule": app.rule.value,
            "pre": _config_json(app.pre), "post": _config_json(app.post),
            "premises": {
                "verdicts": [{"assumptions": [_prop_json(a) for a in c.assumptions], "goal": _prop_json(c.goal),
                              "answer": c.answer.value} for c in app.premises.verdicts],
                "proposal": _proposal_json(app.premises.proposal),
                "stability": None if app.premises.stability is None else {
                    "prop": _prop_json(app.premises.stability.prop),
                    "result": app.premises.stability.result.value,
                },
            },
        })
    lines.append({"type": "outcome", "outcome": trace.outcome})
    Path(path).write_text("".join(json.dumps(d) + "\n" for d in lines))


def load_trace(path: str | Path) -> Trace:
    records = [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
    header = records[0]
    if header.get("type") != "header":
        raise ValueError("trace file must start with a header record")
    program = parse(header["program"], width=header["width"])
    trace = Trace(initial(program, _prop_load(header["goal"], program)))
    for rec in records[1:]:
        if rec["type"] == "step":
            prem = rec["premises"]
            premises = Premises(
                tuple(VerifierCall(tuple(_prop_load(a, program) for a in c["assumptions"]),
                                   _prop_load(c["goal"], program), Answer(c["answer"]))
                      for c in prem["verdicts"]),
                _proposal_load(prem["proposal"], program),
                None if prem["stability"] is None else StabilityCall(
                    _prop_load(prem["stability"]["prop"], program), Stability(prem["stability"]["result"])),
            )
            pre = _config_load(rec["pre"], program)
            trace.steps.append(RuleApplication(Rule(rec["rule"]), premises, pre,
                                               _config_load(rec["post"], program)))
        elif rec["type"] == "outcome":
            trace.outcome = rec["outcome"]
    return trace
