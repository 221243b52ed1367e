"""Search for an instance where only the case-split rule can finish the proof.

We want a goal p, a property q on an ordinary line before the loop, and a
state budget B such that

  * q is stable but not invariant (checked by brute force),
  * both q and its negation imply p (brute force),
  * the explicit engine answers Unknown for p alone under B, yet proves
    both conditional queries under B.

The last point works because assuming q (or not q) prunes half of the
reachable states, so each conditional query fits a budget the unconditional
one does not.
"""

from __future__ import annotations

from dataclasses import dataclass

from bruteforce import holds, stable
from invguide.driver import prepare
from invguide.program import Program, Property, negate, parse, parse_property
from invguide.verifier import Answer, Budget, explicit

TEMPLATE = (
    "uint8_t c = rand() % {m};\n"
    "uint8_t x = 0;\n"
    "while (rand()) {{\n"
    "if (c < {t}) {{\n"
    "x += {a};\n"
    "}} else {{\n"
    "x += {b};\n"
    "}}\n"
    "}}\n"
    "assert(x % 2 == 0);\n"
)


@dataclass(frozen=True)
class Succ2Instance:
    source: str
    program: Program
    goal: Property
    split: Property
    budget: int
    states: tuple[int, int, int]  # full-budget state counts for p, q => p, not q => p


def family():
    for m in (8, 16, 32, 64):
        for a, b in ((2, 6), (2, 4), (4, 6)):
            yield TEMPLATE.format(m=m, t=m // 2, a=a, b=b)


def derive() -> Succ2Instance:
    for source in family():
        program, goal = prepare(parse(source))
        q = parse_property("c < " + source.split("c < ")[1].split(")")[0], program.markers["A"], program)
        nq = negate(q)
        if not stable(program, q) or holds(program, (), q):
            continue
        if not (holds(program, (q,), goal) and holds(program, (nq,), goal)):
            continue
        exact = [explicit.verify(program, a, goal) for a in ((), (q,), (nq,))]
        if any(v.value is not Answer.TRUE for v in exact):
            continue
        alone, with_q, with_nq = (v.states for v in exact)
        budget = max(with_q, with_nq)
        if budget >= alone:
            continue
        under = [explicit.verify(program, a, goal, Budget(max_states=budget)).value for a in ((), (q,), (nq,))]
        if under == [Answer.UNKNOWN, Answer.TRUE, Answer.TRUE]:
            return Succ2Instance(source, program, goal, q, budget, (alone, with_q, with_nq))
    raise LookupError("no instance in the family separates the budgets")
