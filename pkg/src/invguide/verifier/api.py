from __future__ import annotations

import threading
from typing import Iterable, Protocol

from ..program.printer import print_expr, print_program
from ..program.syntax import Program, Property
from ..program.transform import check_line, line_in_loop
from . import explicit, kinduction
from .types import Budget, Stability, StabilityResult, Verdict

ENGINES = {"explicit": explicit.verify, "kinduction": kinduction.verify}


class Verifier(Protocol):
    name: str

    def verify(self, program: Program, assumptions: Iterable[Property], goal: Property) -> Verdict: ...

    def check_stable(self, program: Program, q: Property) -> StabilityResult: ...


def syntactic_stability(program: Program, q: Property) -> Stability:
    """A line that runs at most once per execution is trivially stable."""
    return Stability.UNKNOWN if line_in_loop(program, q.line) else Stability.STABLE


class BuiltinVerifier:
    """Sound verifier over the W-bit semantics, with a choice of engine."""

    def __init__(self, engine: str = "explicit", budget: Budget | None = None):
        if engine not in ENGINES:
            raise ValueError(f"unknown engine {engine!r}; choose from {sorted(ENGINES)}")
        self.engine = engine
        self.budget = budget or Budget()
        self.name = f"builtin-{engine}"

    def verify(self, program: Program, assumptions: Iterable[Property], goal: Property) -> Verdict:
        assumptions = tuple(assumptions)
        check_line(program, goal.line)
        for q in assumptions:
            check_line(program, q.line)
        return ENGINES[self.engine](program, assumptions, goal, self.budget)

    def check_stable(self, program: Program, q: Property) -> StabilityResult:
        if syntactic_stability(program, q) is Stability.STABLE:
            return StabilityResult(Stability.STABLE)
        return explicit.stability(program, q, self.budget)


def property_key(p: Property) -> tuple[str, int]:
    return print_expr(p.predicate), p.line


class CachedVerifier:
    """Memoizes verdicts per (program, assumptions, goal) within a run."""

    def __init__(self, inner: Verifier):
        self.inner = inner
        self.name = inner.name
        self.hits = 0
        self.calls = 0
        self._lock = threading.Lock()
        self._verdicts: dict = {}
        self._stability: dict = {}

    def _program_key(self, program: Program) -> str:
        return print_program(program) + repr([(print_expr(a.prop.predicate), a.prop.line, a.kind)
                                              for a in program.attachments])

    def verify(self, program: Program, assumptions: Iterable[Property], goal: Property) -> Verdict:
        assumptions = tuple(assumptions)
        key = (self._program_key(program), tuple(sorted(property_key(q) for q in assumptions)), property_key(goal))
        with self._lock:
            self.calls += 1
            if key in self._verdicts:
                self.hits += 1
                return self._verdicts[key]
        verdict = self.inner.verify(program, assumptions, goal)
        with self._lock:
            self._verdicts[key] = verdict
        return verdict

    def check_stable(self, program: Program, q: Property) -> StabilityResult:
        key = (self._program_key(program), property_key(q))
        with self._lock:
            if key in self._stability:
                return self._stability[key]
        result = self.inner.check_stable(program, q)
        with self._lock:
            self._stability[key] = result
        return result
