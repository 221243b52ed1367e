"""Extracting, merging and filtering proposed properties."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Iterable

from ..program.parser import ParseError, parse_expr
from ..program.printer import print_expr
from ..program.syntax import Program, Property


@dataclass(frozen=True)
class Origin:
    """Why a proposal exists: a propose call for ``goal``, or a repair of ``failed``."""

    kind: str  # propose | repair
    goal: Property
    failed: Property | None = None
    verdict: str | None = None


@dataclass(frozen=True)
class Proposal:
    prop: Property
    frequency: int = 1
    source: str = ""
    raw: str = ""
    prompt_id: str = ""
    rank: int = 0
    origin: Origin | None = None

    @property
    def printed(self) -> str:
        return print_expr(self.prop.predicate)


_MARKER = re.compile(r"\s*(?://\s*[Ll]ine\s+(\w+))?")


def _assert_calls(line: str) -> Iterable[tuple[str, str | None]]:
    """Yield ``(expression text, marker name)`` for each ``assert(...);`` on a line."""
    pos = 0
    while True:
        m = re.compile(r"assert\s*\(").search(line, pos)
        if not m:
            return
        depth, i = 1, m.end()
        while i < len(line) and depth:
            if line[i] == "(":
                depth += 1
            elif line[i] == ")":
                depth -= 1
            i += 1
        if depth:
            return
        body = line[m.end():i - 1]
        rest = re.compile(r"\s*;").match(line, i)
        if rest is None:
            pos = i
            continue
        marker = _MARKER.match(line, rest.end())
        yield body, marker.group(1)
        pos = marker.end() if marker.end() > rest.end() else rest.end()


def parse_response(text: str, markers: dict[str, int], program: Program,
                   fixed_line: int | None = None, source: str = "", prompt_id: str = "",
                   origin: Origin | None = None) -> list[Proposal]:
    """Proposals found in ``text``, one per well-formed ``assert(e); // line X``.

    Without ``fixed_line`` the marker must name an entry of ``markers``; with it
    (repair answers) the marker is ignored. Anything else is dropped silently.
    """
    out: list[Proposal] = []
    upper = {name.upper(): line for name, line in markers.items()}
    for raw in text.splitlines():
        for body, marker in _assert_calls(raw):
            if fixed_line is not None:
                line = fixed_line
            elif marker is not None and marker.upper() in upper:
                line = upper[marker.upper()]
            else:
                continue
            try:
                pred = parse_expr(body, program)
            except (ParseError, RecursionError):
                continue
            out.append(Proposal(Property(pred, line), 1, source, raw.strip(), prompt_id, 0, origin))
    return out


def rank_key(p: Proposal) -> tuple[int, int, str, int]:
    printed = p.printed
    return (-p.frequency, len(printed), printed, p.prop.line)


def rank_and_dedup(proposals: Iterable[Proposal]) -> list[Proposal]:
    """Merge structurally equal proposals at the same line, then order by
    frequency, shorter printed form, the printed text, then the line."""
    merged: dict[Property, Proposal] = {}
    for p in proposals:
        if p.prop in merged:
            first = merged[p.prop]
            merged[p.prop] = replace(first, frequency=first.frequency + p.frequency)
        else:
            merged[p.prop] = p
    ranked = sorted(merged.values(), key=rank_key)
    return [replace(p, rank=i) for i, p in enumerate(ranked, start=1)]


def enforce_condition1(proposals: Iterable[Proposal], goal: Property) -> list[Proposal]:
    """Keep proposals strictly above the goal's line that are not the goal itself."""
    return [p for p in proposals if p.prop.line < goal.line and p.prop != goal]
