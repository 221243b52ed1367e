"""Program transformations used by the calculus and the oracles."""

from __future__ import annotations

import string
from dataclasses import replace

from .parser import parse
from .printer import render_lines
from .syntax import (
    Assert,
    Attachment,
    If,
    InvalidLine,
    Marker,
    Program,
    Property,
    Stmt,
    Unary,
    While,
    walk,
)


def check_line(program: Program, line: int) -> None:
    if line < 1:
        raise InvalidLine(line, "lines are 1-based")
    program.statement_at(line)


def instrument_assume(program: Program, q: Property) -> Program:
    """Attach ``assume(q)`` to ``q.line``: executions reaching it with ``q`` false stop there."""
    check_line(program, q.line)
    return replace(program, attachments=program.attachments + (Attachment("assume", q),))


def instrument_assert(program: Program, p: Property) -> Program:
    """Make ``p`` the sole assertion; the program's own asserts are no longer shown."""
    check_line(program, p.line)
    kept = tuple(a for a in program.attachments if a.kind != "assert")
    return replace(program, attachments=kept + (Attachment("assert", p),), show_asserts=False)


def negate(p: Property) -> Property:
    return Property(Unary("!", p.predicate), p.line)


def line_in_loop(program: Program, line: int) -> bool:
    """True when the statement at ``line`` can run more than once per execution:
    it sits in a loop body, or it is a loop header (re-checked every iteration)."""
    check_line(program, line)
    stmt, depth = program.by_line[line]
    return depth > 0 or isinstance(stmt, While)


def marker_label(index: int) -> str:
    letters = string.ascii_uppercase
    label = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        label = letters[rem] + label
    return label


def insert_placeholders(program: Program) -> Program:
    """Add ``// Line A``, ``// Line B``, ... before each loop and at the start of
    each loop body. A loop-free program gets one marker before its first assert.

    Programs that already carry markers are returned unchanged. The result is
    renumbered; ``origin`` maps each new line back to the input's lines.
    """
    if program.markers:
        return program
    counter = iter(range(10_000))

    def fresh() -> Marker:
        return Marker(0, marker_label(next(counter)))

    def place(stmts: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for s in stmts:
            if isinstance(s, While):
                out.append(fresh())
                out.append(replace(s, body=(fresh(),) + place(s.body)))
            elif isinstance(s, If):
                out.append(replace(s, then=place(s.then), orelse=place(s.orelse)))
            else:
                out.append(s)
        return tuple(out)

    if program.loops():
        statements = place(program.statements)
    else:
        first_assert = next((s for s, _ in walk(program.statements) if isinstance(s, Assert)), None)
        if first_assert is None:
            return program

        def before_assert(stmts: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
            out: list[Stmt] = []
            for s in stmts:
                if s is first_assert:
                    out.append(fresh())
                if isinstance(s, If):
                    s = replace(s, then=before_assert(s.then), orelse=before_assert(s.orelse))
                out.append(s)
            return tuple(out)

        statements = before_assert(program.statements)
    return renumber(replace(program, statements=statements))


def renumber(program: Program) -> Program:
    """Reparse the printed form so every statement gets its printed line.

    Lines of the input program carried through become ``origin`` entries.
    """
    bare = replace(program, attachments=(), show_asserts=True)
    rendered = render_lines(bare)
    text = "\n".join(t for t, _ in rendered) + "\n"
    fresh = parse(text, width=program.width)
    origin = tuple(
        (new_line, old_line)
        for new_line, (_, old_line) in enumerate(rendered, start=1)
        if old_line  # markers inserted here carry line 0
    )
    old_to_new = {old: new for new, old in origin}
    attachments = tuple(
        Attachment(a.kind, Property(a.prop.predicate, old_to_new[a.prop.line]))
        for a in program.attachments
        if a.prop.line in old_to_new
    )
    return replace(fresh, attachments=attachments, show_asserts=program.show_asserts, origin=origin)


def placeholder_point(program: Program, line: int) -> int | None:
    """Line in ``program.origin``'s source that a (possibly inserted) line denotes.

    An inserted marker stands for the next original statement in source order.
    """
    mapping = dict(program.origin)
    if line in mapping:
        return mapping[line]
    for later in program.lines:
        if later > line and later in mapping:
            return mapping[later]
    return None
