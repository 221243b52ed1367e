"""Pretty-printer: one statement per line, unindented, minimal parentheses."""

from __future__ import annotations

from .syntax import (
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
    Return,
    Stmt,
    Unary,
    Var,
    While,
)

_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7
_ATOM_PREC = 8


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, (Unary, Cast)):
        return _UNARY_PREC
    return _ATOM_PREC


def print_expr(e: Expr) -> str:
    if isinstance(e, Num):
        return e.text if e.text is not None else str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Nondet):
        return f"{e.func}()"
    if isinstance(e, Unary):
        inner = print_expr(e.operand)
        if _prec(e.operand) < _UNARY_PREC or (e.op == "-" and isinstance(e.operand, Unary) and e.operand.op == "-"):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, Cast):
        inner = print_expr(e.operand)
        if _prec(e.operand) < _UNARY_PREC:
            inner = f"({inner})"
        return f"({e.ctype}) {inner}"
    if isinstance(e, Binary):
        p = _PREC[e.op]
        left = print_expr(e.left)
        right = print_expr(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an expression: {e!r}")


def _assign_text(s: Assign) -> str:
    if s.op in ("++", "--"):
        return f"{s.op}{s.target};" if s.prefix else f"{s.target}{s.op};"
    return f"{s.target} {s.op} {print_expr(s.value)};"


def render_lines(program: Program, marker_names: dict[int, str] | None = None,
                 keep_marker=None) -> list[tuple[str, int | None]]:
    """Render to ``(text, source_line)`` pairs; ``source_line`` is None for
    structural lines such as ``}``.

    ``marker_names`` relabels markers by line; ``keep_marker(line)`` decides
    whether a marker is printed at all.
    """
    out: list[tuple[str, int | None]] = []
    attached: dict[int, list[str]] = {}
    for a in program.attachments:
        attached.setdefault(a.prop.line, []).append(f"{a.kind}({print_expr(a.prop.predicate)});")

    def emit(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            for text in attached.get(s.line, ()):
                out.append((text, None))
            if isinstance(s, Marker):
                if keep_marker is None or keep_marker(s.line):
                    name = (marker_names or {}).get(s.line, s.name)
                    out.append((f"// Line {name}", s.line))
            elif isinstance(s, Decl):
                items = ", ".join(
                    it.name if it.init is None else f"{it.name} = {print_expr(it.init)}" for it in s.items
                )
                out.append((f"{s.ctype} {items};", s.line))
            elif isinstance(s, Assign):
                out.append((_assign_text(s), s.line))
            elif isinstance(s, While):
                out.append((f"while ({print_expr(s.cond)}) {{", s.line))
                emit(s.body)
                out.append(("}", None))
            elif isinstance(s, If):
                out.append((f"if ({print_expr(s.cond)}) {{", s.line))
                emit(s.then)
                if s.orelse:
                    out.append(("} else {", None))
                    emit(s.orelse)
                out.append(("}", None))
            elif isinstance(s, Assume):
                out.append((f"assume({print_expr(s.cond)});", s.line))
            elif isinstance(s, Assert):
                if program.show_asserts:
                    out.append((f"assert({print_expr(s.cond)});", s.line))
            elif isinstance(s, Return):
                text = "return;" if s.value is None else f"return {print_expr(s.value)};"
                out.append((text, s.line))
            else:
                raise TypeError(f"not a statement: {s!r}")

    if program.wrapped:
        out.append(("int main() {", None))
    emit(program.statements)
    if program.wrapped:
        out.append(("}", None))
    return out


def print_program(program: Program, **kwargs) -> str:
    return "\n".join(text for text, _ in render_lines(program, **kwargs)) + "\n"
