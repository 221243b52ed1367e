"""AST for the C-like input language.

Expressions and statements are frozen dataclasses, so structural equality is
plain ``==``. Integer literals keep their source spelling for printing, but the
spelling does not take part in equality (``0xff == 255``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Union

ARITH_OPS = ("+", "-", "*", "/", "%")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
LOGIC_OPS = ("&&", "||")
BINARY_OPS = ARITH_OPS + COMPARE_OPS + LOGIC_OPS
UNARY_OPS = ("!", "-")


@dataclass(frozen=True)
class Num:
    value: int
    text: str | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary:
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Cast:
    """Explicit conversion such as ``(unsigned char) e``; masks to ``bits``."""

    ctype: str
    bits: int
    operand: Expr


@dataclass(frozen=True)
class Nondet:
    """A call producing an arbitrary value (``rand()``, ``__VERIFIER_nondet_uint()``)."""

    func: str = field(default="rand", compare=False)


Expr = Union[Num, Var, Unary, Binary, Cast, Nondet]


def iter_expr(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Unary) or isinstance(e, Cast):
        yield from iter_expr(e.operand)
    elif isinstance(e, Binary):
        yield from iter_expr(e.left)
        yield from iter_expr(e.right)


def expr_vars(e: Expr) -> set[str]:
    return {n.name for n in iter_expr(e) if isinstance(n, Var)}


def has_nondet(e: Expr | None) -> bool:
    return e is not None and any(isinstance(n, Nondet) for n in iter_expr(e))


def expr_equal(a: Expr, b: Expr) -> bool:
    """Structural AST equality after literal normalization.

    No algebraic normalization: ``x + z`` and ``z + x`` are different.
    """
    return a == b


# ---------------------------------------------------------------- statements


@dataclass(frozen=True)
class DeclItem:
    name: str
    init: Expr | None = None


@dataclass(frozen=True)
class Decl:
    line: int
    ctype: str
    items: tuple[DeclItem, ...]


@dataclass(frozen=True)
class Assign:
    """``target op value``; ``op`` is ``=``, a compound operator, ``++`` or ``--``."""

    line: int
    target: str
    op: str
    value: Expr | None = None
    prefix: bool = False


@dataclass(frozen=True)
class While:
    line: int
    cond: Expr
    body: tuple[Stmt, ...]


@dataclass(frozen=True)
class If:
    line: int
    cond: Expr
    then: tuple[Stmt, ...]
    orelse: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class Assume:
    line: int
    cond: Expr


@dataclass(frozen=True)
class Assert:
    line: int
    cond: Expr


@dataclass(frozen=True)
class Return:
    line: int
    value: Expr | None = None


@dataclass(frozen=True)
class Marker:
    line: int
    name: str


Stmt = Union[Decl, Assign, While, If, Assume, Assert, Return, Marker]


def walk(stmts: tuple[Stmt, ...], loop_depth: int = 0) -> Iterator[tuple[Stmt, int]]:
    """Yield ``(stmt, loop_depth)`` in source order."""
    for s in stmts:
        yield s, loop_depth
        if isinstance(s, While):
            yield from walk(s.body, loop_depth + 1)
        elif isinstance(s, If):
            yield from walk(s.then, loop_depth)
            yield from walk(s.orelse, loop_depth)


@dataclass(frozen=True)
class Property:
    """A predicate paired with the program line where it is evaluated."""

    predicate: Expr
    line: int

    def __str__(self) -> str:
        from .printer import print_expr

        return f"{print_expr(self.predicate)}@{self.line}"


@dataclass(frozen=True)
class Attachment:
    """An ``assume``/``assert`` attached to a line without renumbering."""

    kind: str  # "assume" | "assert"
    prop: Property


@dataclass(frozen=True)
class Variable:
    name: str
    ctype: str
    bits: int


@dataclass(frozen=True)
class Program:
    statements: tuple[Stmt, ...]
    variables: tuple[Variable, ...]
    width: int = 8
    wrapped: bool = False
    attachments: tuple[Attachment, ...] = ()
    show_asserts: bool = True
    # line in this program -> line in the program it was derived from
    origin: tuple[tuple[int, int], ...] = field(default=(), compare=False)

    @cached_property
    def var_bits(self) -> dict[str, int]:
        return {v.name: v.bits for v in self.variables}

    @cached_property
    def by_line(self) -> dict[int, tuple[Stmt, int]]:
        return {s.line: (s, depth) for s, depth in walk(self.statements)}

    @cached_property
    def markers(self) -> dict[str, int]:
        return {s.name: s.line for s, _ in walk(self.statements) if isinstance(s, Marker)}

    @property
    def lines(self) -> list[int]:
        return sorted(self.by_line)

    def statement_at(self, line: int) -> Stmt:
        try:
            return self.by_line[line][0]
        except KeyError:
            raise InvalidLine(line) from None

    def asserts(self) -> list[Assert]:
        return [s for s, _ in walk(self.statements) if isinstance(s, Assert)]

    def loops(self) -> list[While]:
        return [s for s, _ in walk(self.statements) if isinstance(s, While)]

    def assumptions(self) -> tuple[Property, ...]:
        return tuple(a.prop for a in self.attachments if a.kind == "assume")

    def origin_line(self, line: int) -> int | None:
        return dict(self.origin).get(line)

    def line_for_origin(self, line: int) -> int | None:
        for new, old in self.origin:
            if old == line:
                return new
        return None


class InvalidLine(ValueError):
    def __init__(self, line: int, reason: str = "no statement starts on this line"):
        super().__init__(f"invalid line {line}: {reason}")
        self.line = line
