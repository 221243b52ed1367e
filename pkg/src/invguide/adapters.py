"""External verifiers as opaque processes: render, spawn with a timeout, classify output."""

from __future__ import annotations

import os
import re
import shlex
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass
from typing import Iterable

from .program.printer import print_expr
from .program.syntax import (
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
    Program,
    Property,
    Return,
    Stmt,
    Unary,
    While,
    expr_vars,
    walk,
)
from .program.transform import check_line
from .verifier.api import syntactic_stability
from .verifier.types import Answer, StabilityResult, Verdict


class UnsupportedConstruct(ValueError):
    pass


class SpawnError(OSError):
    pass


@dataclass(frozen=True)
class Dialect:
    name: str
    nondet: str
    assume: str  # format string with {cond}
    assert_: str
    preamble: str


SVCOMP = Dialect(
    name="svcomp",
    nondet="__VERIFIER_nondet_uint",
    assume="__VERIFIER_assume({cond});",
    assert_="__VERIFIER_assert({cond});",
    preamble=(
        "#include <stdint.h>\n"
        "extern void abort(void);\n"
        'extern void __assert_fail(const char *, const char *, unsigned int, const char *);\n'
        'void reach_error() { __assert_fail("0", "goal.c", 0, "reach_error"); }\n'
        "extern unsigned int __VERIFIER_nondet_uint(void);\n"
        "extern void __VERIFIER_assume(int cond);\n"
        "void __VERIFIER_assert(int cond) { if (!(cond)) { ERROR: {reach_error(); abort();} } }\n"
    ),
)

PLAIN = Dialect(
    name="plain",
    nondet="rand",
    assume="if (!({cond})) return 0;",
    assert_="assert({cond});",
    preamble="#include <assert.h>\n#include <stdint.h>\n#include <stdlib.h>\n",
)

DIALECTS = {d.name: d for d in (SVCOMP, PLAIN)}


def _rename_nondet(e: Expr, func: str) -> Expr:
    if isinstance(e, Nondet):
        return Nondet(func)
    if isinstance(e, Unary):
        return Unary(e.op, _rename_nondet(e.operand, func))
    if isinstance(e, Cast):
        return Cast(e.ctype, e.bits, _rename_nondet(e.operand, func))
    if isinstance(e, Binary):
        return Binary(e.op, _rename_nondet(e.left, func), _rename_nondet(e.right, func))
    return e


def render_dialect(program: Program, assumptions: Iterable[Property], goal: Property,
                   dialect: Dialect | str = SVCOMP) -> str:
    """Compile-ready C with the assumptions as assumes and ``goal`` as the only assert."""
    if isinstance(dialect, str):
        dialect = DIALECTS[dialect]
    props = [("assume", q) for q in list(program.assumptions()) + list(assumptions)] + [("assert", goal)]
    for _, q in props:
        check_line(program, q.line)

    at_line: dict[int, list[str]] = {}
    loop_end: dict[int, list[str]] = {}

    def cond_text(kind: str, q: Property) -> str:
        fmt = dialect.assume if kind == "assume" else dialect.assert_
        return fmt.format(cond=print_expr(q.predicate))

    # scope check: every property must only mention variables declared before its line
    order = {line: idx for idx, line in enumerate(program.lines)}
    decl_index = {}
    for s, _ in walk(program.statements):
        if isinstance(s, Decl):
            for item in s.items:
                decl_index[item.name] = order[s.line]
    for kind, q in props:
        for v in expr_vars(q.predicate):
            if decl_index.get(v, -1) >= order[q.line]:
                raise UnsupportedConstruct(f"{v!r} is not in scope at line {q.line}")
        stmt = program.statement_at(q.line)
        at_line.setdefault(q.line, []).append(cond_text(kind, q))
        if isinstance(stmt, While):
            loop_end.setdefault(q.line, []).append(cond_text(kind, q))

    out: list[str] = []

    def expr(e: Expr) -> str:
        return print_expr(_rename_nondet(e, dialect.nondet))

    def emit(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            out.extend(at_line.get(s.line, ()))
            if isinstance(s, Decl):
                # one item per declaration keeps nondet calls in source order;
                # uninitialized locals are havocked explicitly
                for it in s.items:
                    init = f"{dialect.nondet}()" if it.init is None else expr(it.init)
                    out.append(f"{s.ctype} {it.name} = {init};")
            elif isinstance(s, Assign):
                if s.op in ("++", "--"):
                    out.append(f"{s.op}{s.target};" if s.prefix else f"{s.target}{s.op};")
                else:
                    out.append(f"{s.target} {s.op} {expr(s.value)};")
            elif isinstance(s, While):
                out.append(f"while ({expr(s.cond)}) {{")
                emit(s.body)
                out.extend(loop_end.get(s.line, ()))
                out.append("}")
            elif isinstance(s, If):
                out.append(f"if ({expr(s.cond)}) {{")
                emit(s.then)
                if s.orelse:
                    out.append("} else {")
                    emit(s.orelse)
                out.append("}")
            elif isinstance(s, Assume):
                out.append(dialect.assume.format(cond=expr(s.cond)))
            elif isinstance(s, Return):
                out.append("return 0;")
            elif isinstance(s, (Assert, Marker)):
                pass
            else:
                raise UnsupportedConstruct(f"cannot render {type(s).__name__}")

    emit(program.statements)
    body = "\n".join("  " + line for line in out)
    return f"{dialect.preamble}\nint main() {{\n{body}\n  return 0;\n}}\n"


@dataclass(frozen=True)
class AdapterConfig:
    executable: str
    args: tuple[str, ...] = ("{file}",)
    dialect: str = "svcomp"
    timeout: float = 30.0
    success_pattern: str = r"VERIFICATION SUCCESSFUL"
    failure_pattern: str = r"VERIFICATION FAILED"
    grace: float = 2.0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.success_pattern == self.failure_pattern:
            raise ValueError("success and failure patterns must differ")

    @classmethod
    def from_command(cls, command: str, **kwargs) -> AdapterConfig:
        parts = shlex.split(command)
        if not parts:
            raise ValueError("empty verifier command")
        args = tuple(parts[1:]) or ("{file}",)
        if not any("{file}" in a for a in args):
            args = args + ("{file}",)
        return cls(parts[0], args, **kwargs)


def run_external(config: AdapterConfig, source: str) -> Verdict:
    start = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="invguide-") as tmp:
        path = os.path.join(tmp, "goal.c")
        with open(path, "w") as fh:
            fh.write(source)
        argv = [config.executable] + [a.replace("{file}", path) for a in config.args]
        try:
            proc = subprocess.Popen(argv, stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
                                    text=True, start_new_session=True)
        except OSError as exc:
            raise SpawnError(f"cannot start {config.executable!r}: {exc}") from exc
        try:
            output, _ = proc.communicate(timeout=config.timeout)
        except subprocess.TimeoutExpired:
            _kill_group(proc)
            try:
                proc.communicate(timeout=config.grace)
            except subprocess.TimeoutExpired:
                pass
            return Verdict(Answer.UNKNOWN, seconds=time.monotonic() - start, reason="timeout")
    elapsed = time.monotonic() - start
    if re.search(config.failure_pattern, output):
        return Verdict(Answer.FALSE, seconds=elapsed, reason="external")
    if re.search(config.success_pattern, output):
        return Verdict(Answer.TRUE, seconds=elapsed, reason="external")
    return Verdict(Answer.UNKNOWN, seconds=elapsed, reason=f"unclassified output (exit {proc.returncode})")


def _kill_group(proc: subprocess.Popen) -> None:
    try:
        os.killpg(proc.pid, signal.SIGKILL)
    except ProcessLookupError:
        pass


class ExternalVerifier:
    """Verifier backed by an external tool; stability is syntactic only."""

    def __init__(self, config: AdapterConfig):
        self.config = config
        self.name = f"external-{os.path.basename(config.executable)}"

    def verify(self, program: Program, assumptions: Iterable[Property], goal: Property) -> Verdict:
        try:
            source = render_dialect(program, assumptions, goal, self.config.dialect)
        except UnsupportedConstruct as exc:
            return Verdict(Answer.UNKNOWN, reason=f"unsupported: {exc}")
        return run_external(self.config, source)

    def check_stable(self, program: Program, q: Property) -> StabilityResult:
        return StabilityResult(syntactic_stability(program, q))
