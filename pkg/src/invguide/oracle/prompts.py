"""Prompt text for the propose and repair oracles."""

from __future__ import annotations

from dataclasses import replace

from ..program.printer import print_expr, print_program
from ..program.syntax import Program, Property
from ..program.transform import instrument_assert, marker_label
from ..verifier.types import Answer


class NoMarkers(ValueError):
    pass


def visible_markers(program: Program, goal: Property) -> dict[str, int]:
    """Markers above the goal, relabelled A, B, ... in textual order."""
    lines = sorted(line for line in program.markers.values() if line < goal.line)
    return {marker_label(i): line for i, line in enumerate(lines)}


def _markers_in_loops(program: Program, lines) -> bool:
    return all(program.by_line[line][1] > 0 for line in lines)


def goal_listing(program: Program, goal: Property, shown: dict[str, int]) -> str:
    """The program with ``goal`` as its only assertion and just the ``shown`` markers."""
    staged = instrument_assert(replace(program, attachments=()), goal)
    names = {line: name for name, line in shown.items()}
    return print_program(staged, marker_names=names, keep_marker=lambda line: line in names)


def build_propose_prompt(program: Program, goal: Property) -> tuple[str, dict[str, int]]:
    """Return the prompt and the marker map the answer should be read against."""
    shown = visible_markers(program, goal)
    if not shown:
        raise NoMarkers(f"no placeholder marker above line {goal.line}")
    listing = goal_listing(program, goal, shown)
    p2 = "loop invariants" if _markers_in_loops(program, shown.values()) else "facts"
    p3 = "" if len(shown) == 1 else "s"
    p4 = ", ".join(shown)
    p5 = next(iter(shown)) if len(shown) == 1 else "name"
    prompt = (
        f"{listing}"
        f"Print {p2} as valid C assertions at line{p3} {p4} that\n"
        "help prove the assertion. Use '&&' or '||' if necessary. \n"
        f"Don't explain. Your answer should be 'assert(...); // line {p5}'"
    )
    return prompt, shown


def build_repair_prompt(program: Program, goal: Property, failed: Property, verdict: Answer) -> str:
    if verdict not in (Answer.FALSE, Answer.UNKNOWN):
        raise ValueError("repair applies to false or unknown verdicts only")
    if failed.line not in program.markers.values():
        # the failed property sits on an ordinary statement: show it without a marker
        shown = {}
    else:
        shown = {"A": failed.line}
    listing = goal_listing(program, goal, shown)
    p2 = "loop invariants" if program.by_line[failed.line][1] > 0 else "facts"
    p4 = "incorrect" if verdict is Answer.FALSE else "too weak"
    return (
        f"{listing}"
        f"Print {p2} as valid C assertions at line A that help \n"
        f"prove the assertion. Your previous answer '{print_expr(failed.predicate)}' \n"
        f"is {p4}. Use '&&' or '||' if necessary. Don't explain. \n"
        "Your answer should simply be 'assert(...);'"
    )
