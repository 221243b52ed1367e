"""Direct AST interpreter for single executions.

It shares no code with the CFG compiler, so replaying a checker's
counterexample here is an independent confirmation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..program.syntax import (
    Assert,
    Assign,
    Assume,
    Binary,
    Cast,
    Decl,
    Expr,
    If,
    Marker,
    Nondet,
    Num,
    Program,
    Property,
    Return,
    Stmt,
    Unary,
    Var,
    While,
)
from .types import Step


class UnresolvedNondet(LookupError):
    """The resolution ran out before the execution did."""


@dataclass
class Execution:
    steps: list[Step] = field(default_factory=list)
    # finished | truncated (failed assume) | violated | step_limit
    status: str = "finished"
    violation_line: int | None = None
    consumed: int = 0


class _Stop(Exception):
    pass


class _Return(Exception):
    pass


class _Interp:
    def __init__(self, program: Program, resolution: Sequence[int], assumptions: Iterable[Property],
                 goal: Property | None, max_steps: int):
        self.program = program
        self.width = program.width
        self.mask = (1 << program.width) - 1
        self.resolution = list(resolution)
        self.store = {v.name: 0 for v in program.variables}
        self.assumes: dict[int, list[Expr]] = {}
        for q in list(program.assumptions()) + list(assumptions):
            self.assumes.setdefault(q.line, []).append(q.predicate)
        if goal is None:
            attached = [a.prop for a in program.attachments if a.kind == "assert"]
            goal = attached[-1] if attached else None
        self.goal = goal
        self.max_steps = max_steps
        self.run = Execution()

    def nondet(self) -> int:
        if self.run.consumed >= len(self.resolution):
            raise UnresolvedNondet(f"resolution exhausted after {self.run.consumed} values")
        value = self.resolution[self.run.consumed]
        self.run.consumed += 1
        return value & self.mask

    def value(self, e: Expr) -> int:
        m = self.mask
        if isinstance(e, Num):
            return e.value & m
        if isinstance(e, Var):
            return self.store[e.name]
        if isinstance(e, Nondet):
            return self.nondet()
        if isinstance(e, Cast):
            return self.value(e.operand) % (1 << e.bits)
        if isinstance(e, Unary):
            v = self.value(e.operand)
            return int(v == 0) if e.op == "!" else (m + 1 - v) % (m + 1)
        op = e.op
        if op == "&&":
            return int(self.value(e.left) != 0 and self.value(e.right) != 0)
        if op == "||":
            return int(self.value(e.left) != 0 or self.value(e.right) != 0)
        a = self.value(e.left)
        b = self.value(e.right)
        if op == "+":
            return (a + b) % (m + 1)
        if op == "-":
            return (a - b) % (m + 1)
        if op == "*":
            return (a * b) % (m + 1)
        if op == "/":
            return m if b == 0 else a // b
        if op == "%":
            return a if b == 0 else a % b
        return int({
            "==": a == b, "!=": a != b, "<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
        }[op])

    def visit(self, line: int) -> None:
        if len(self.run.steps) >= self.max_steps:
            self.run.status = "step_limit"
            raise _Stop
        self.run.steps.append(Step(line, tuple(self.store.items())))
        for pred in self.assumes.get(line, ()):
            if not self.value(pred):
                self.run.status = "truncated"
                raise _Stop
        if self.goal is not None and self.goal.line == line and not self.value(self.goal.predicate):
            self.run.status = "violated"
            self.run.violation_line = line
            raise _Stop

    def assign(self, name: str, value: int) -> None:
        self.store[name] = value % (1 << self.program.var_bits[name])

    def execute(self, stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            self.statement(s)

    def statement(self, s: Stmt) -> None:
        if isinstance(s, While):
            while True:
                self.visit(s.line)
                if not self.value(s.cond):
                    return
                self.execute(s.body)
        self.visit(s.line)
        if isinstance(s, Decl):
            for item in s.items:
                self.assign(item.name, self.value(item.init) if item.init is not None else self.nondet())
        elif isinstance(s, Assign):
            old = self.store[s.target]
            m1 = self.mask + 1
            if s.op == "=":
                new = self.value(s.value)
            elif s.op == "++":
                new = (old + 1) % m1
            elif s.op == "--":
                new = (old - 1) % m1
            else:
                rhs = self.value(s.value)
                new = self.value(Binary(s.op[0], Num(old), Num(rhs)))
            self.assign(s.target, new)
        elif isinstance(s, If):
            self.execute(s.then if self.value(s.cond) else s.orelse)
        elif isinstance(s, Assume):
            if not self.value(s.cond):
                self.run.status = "truncated"
                raise _Stop
        elif isinstance(s, Return):
            raise _Return
        elif not isinstance(s, (Assert, Marker)):
            raise TypeError(f"not a statement: {s!r}")


def evaluate(program: Program, resolution: Sequence[int], assumptions: Iterable[Property] = (),
             goal: Property | None = None, max_steps: int = 100_000) -> Execution:
    """Run one execution, taking rand() results from ``resolution`` in order.

    ``goal`` (or the program's attached assert) stops the run on the first
    visit where it is false; attached or passed assumptions truncate it.
    """
    interp = _Interp(program, resolution, assumptions, goal, max_steps)
    try:
        interp.execute(program.statements)
    except (_Stop, _Return):
        pass
    return interp.run
