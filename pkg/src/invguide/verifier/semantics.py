"""Compile a Program into a control-flow graph over fixed-width stores.

Expressions become Python lambdas ``f(s, r)`` where ``s`` is the store tuple
and ``r`` the value of the statement's single nondet call (if any).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

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
    has_nondet,
)

END = 0


def _div(a: int, b: int, mask: int) -> int:
    return mask if b == 0 else a // b


def _mod(a: int, b: int) -> int:
    return a if b == 0 else a % b


_NS = {"_div": _div, "_mod": _mod}


def expr_code(e: Expr, index: dict[str, int], mask: int) -> str:
    if isinstance(e, Num):
        return str(e.value & mask)
    if isinstance(e, Var):
        return f"s[{index[e.name]}]"
    if isinstance(e, Nondet):
        return f"(r & {mask})"
    if isinstance(e, Cast):
        return f"({expr_code(e.operand, index, mask)} & {(1 << e.bits) - 1})"
    if isinstance(e, Unary):
        a = expr_code(e.operand, index, mask)
        return f"(0 if {a} else 1)" if e.op == "!" else f"((-{a}) & {mask})"
    if isinstance(e, Binary):
        a = expr_code(e.left, index, mask)
        b = expr_code(e.right, index, mask)
        op = e.op
        if op in ("+", "-", "*"):
            return f"(({a} {op} {b}) & {mask})"
        if op == "/":
            return f"_div({a}, {b}, {mask})"
        if op == "%":
            return f"_mod({a}, {b})"
        if op == "&&":
            return f"(1 if ({a} and {b}) else 0)"
        if op == "||":
            return f"(1 if ({a} or {b}) else 0)"
        return f"(1 if {a} {op} {b} else 0)"
    raise TypeError(f"not an expression: {e!r}")


def compile_fn(e: Expr, index: dict[str, int], mask: int) -> Callable[[tuple, int], int]:
    return eval(f"lambda s, r: {expr_code(e, index, mask)}", dict(_NS))


@dataclass
class Node:
    line: int
    kind: str  # assign | branch | assume | nop | end
    check: bool = False  # properties at ``line`` are evaluated on entry
    target: int | None = None
    target_mask: int = 0
    fn: Callable[[tuple, int], int] | None = None
    nondet: bool = False
    domain: int = 1  # number of distinct rand() values worth enumerating
    pure_havoc: bool = False  # target := rand(), value independent of the store
    succ: int = END
    alt: int = END


@dataclass
class PropertyCheck:
    line: int
    fn: Callable[[tuple, int], int]

    def holds(self, store: tuple) -> bool:
        return bool(self.fn(store, 0))


@dataclass
class CFG:
    program: Program
    names: tuple[str, ...]
    masks: tuple[int, ...]
    nodes: list[Node]
    entry: int
    assumes: dict[int, list[PropertyCheck]] = field(default_factory=dict)
    goal: PropertyCheck | None = None

    @property
    def mask(self) -> int:
        return (1 << self.program.width) - 1

    def initial_store(self) -> tuple[int, ...]:
        return (0,) * len(self.names)

    def store_items(self, store: tuple) -> tuple[tuple[str, int], ...]:
        return tuple(zip(self.names, store))

    def dead(self, pc: int, store: tuple) -> bool:
        node = self.nodes[pc]
        if not node.check:
            return False
        return any(not a.holds(store) for a in self.assumes.get(node.line, ()))

    def bad(self, pc: int, store: tuple) -> bool:
        node = self.nodes[pc]
        return bool(node.check and self.goal is not None and node.line == self.goal.line
                    and not self.goal.holds(store))

    def values(self, pc: int, sample: Callable[[int], Iterable[int]] | None = None) -> Iterable[int]:
        node = self.nodes[pc]
        if not node.nondet:
            return (0,)
        if sample is not None:
            return sample(node.domain)
        return range(node.domain)

    def successors(self, pc: int, store: tuple,
                   sample: Callable[[int], Iterable[int]] | None = None) -> Iterator[tuple[int | None, int, tuple]]:
        """Yield ``(r, next_pc, next_store)``; ``r`` is None when no rand() was consumed."""
        node = self.nodes[pc]
        kind = node.kind
        if kind == "end":
            return
        if kind == "nop":
            yield None, node.succ, store
            return
        if kind == "assume":
            if node.fn(store, 0):
                yield None, node.succ, store
            return
        if kind == "assign":
            t = node.target
            seen = set()
            for r in self.values(pc, sample):
                v = node.fn(store, r) & node.target_mask
                if v in seen:
                    continue
                seen.add(v)
                yield (r if node.nondet else None), node.succ, store[:t] + (v,) + store[t + 1:]
            return
        if kind == "branch":
            outcomes = set()
            for r in self.values(pc, sample):
                taken = bool(node.fn(store, r))
                if taken in outcomes:
                    continue
                outcomes.add(taken)
                yield (r if node.nondet else None), (node.succ if taken else node.alt), store
                if len(outcomes) == 2:
                    return
            return
        raise AssertionError(kind)


def _period(e: Expr, mask: int) -> int | None:
    """``c`` if every rand() in ``e`` appears as ``rand() % c`` for a nonzero constant:
    then r in [0, c) already produces every outcome."""
    if isinstance(e, Binary) and e.op == "%" and isinstance(e.left, Nondet) and isinstance(e.right, Num):
        c = e.right.value & mask
        return c or None
    if isinstance(e, Nondet):
        return None
    if isinstance(e, (Unary, Cast)):
        return _period(e.operand, mask) if has_nondet(e.operand) else 0
    if isinstance(e, Binary):
        parts = [_period(x, mask) for x in (e.left, e.right) if has_nondet(x)]
        if not parts or None in parts:
            return None
        return max(parts)
    return 0


def _domain(e: Expr, width: int, target_bits: int | None) -> tuple[int, bool]:
    """rand() values worth enumerating, and whether the value is a pure havoc."""
    bits = width
    inner = e
    while isinstance(inner, Cast):
        bits = min(bits, inner.bits)
        inner = inner.operand
    if isinstance(inner, Nondet):
        if target_bits is not None:
            bits = min(bits, target_bits)
        return 1 << bits, target_bits is not None
    period = _period(e, (1 << width) - 1)
    if period:
        return min(period, 1 << width), False
    return 1 << width, False


def compile_program(program: Program, assumptions: Iterable[Property] = (),
                    goal: Property | None = None) -> CFG:
    names = tuple(v.name for v in program.variables)
    index = {n: i for i, n in enumerate(names)}
    masks = tuple((1 << v.bits) - 1 for v in program.variables)
    width = program.width
    mask = (1 << width) - 1
    nodes: list[Node] = [Node(0, "end")]

    def add(node: Node) -> int:
        nodes.append(node)
        return len(nodes) - 1

    def assign_node(line: int, target: str, value: Expr, check: bool, succ: int) -> int:
        t = index[target]
        nondet = has_nondet(value)
        domain, havoc = _domain(value, width, program.var_bits[target]) if nondet else (1, False)
        return add(Node(line, "assign", check=check, target=t, target_mask=masks[t],
                        fn=compile_fn(value, index, mask), nondet=nondet, domain=domain,
                        pure_havoc=havoc, succ=succ))

    def stmt(s: Stmt, cont: int) -> int:
        if isinstance(s, Decl):
            entry = cont
            for pos in range(len(s.items) - 1, -1, -1):
                item = s.items[pos]
                value = item.init if item.init is not None else Nondet()
                entry = assign_node(s.line, item.name, value, pos == 0, entry)
            return entry
        if isinstance(s, Assign):
            target = Var(s.target)
            if s.op == "=":
                value = s.value
            elif s.op in ("++", "--"):
                value = Binary("+" if s.op == "++" else "-", target, Num(1))
            else:
                value = Binary(s.op[0], target, s.value)
            return assign_node(s.line, s.target, value, True, cont)
        if isinstance(s, While):
            header = add(Node(s.line, "branch", check=True))
            node = nodes[header]
            node.fn = compile_fn(s.cond, index, mask)
            node.nondet = has_nondet(s.cond)
            node.domain = _domain(s.cond, width, None)[0] if node.nondet else 1
            node.succ = block(s.body, header)
            node.alt = cont
            return header
        if isinstance(s, If):
            then = block(s.then, cont)
            orelse = block(s.orelse, cont)
            nondet = has_nondet(s.cond)
            return add(Node(s.line, "branch", check=True, fn=compile_fn(s.cond, index, mask),
                            nondet=nondet, domain=_domain(s.cond, width, None)[0] if nondet else 1,
                            succ=then, alt=orelse))
        if isinstance(s, Assume):
            return add(Node(s.line, "assume", check=True, fn=compile_fn(s.cond, index, mask), succ=cont))
        if isinstance(s, (Assert, Marker)):
            # the program's own asserts are not goals; only the checked property is
            return add(Node(s.line, "nop", check=True, succ=cont))
        if isinstance(s, Return):
            return add(Node(s.line, "nop", check=True, succ=END))
        raise TypeError(f"not a statement: {s!r}")

    def block(stmts: tuple[Stmt, ...], cont: int) -> int:
        entry = cont
        for s in reversed(stmts):
            entry = stmt(s, entry)
        return entry

    entry = block(program.statements, END)
    cfg = CFG(program, names, masks, nodes, entry)
    for q in list(program.assumptions()) + list(assumptions):
        cfg.assumes.setdefault(q.line, []).append(PropertyCheck(q.line, compile_fn(q.predicate, index, mask)))
    if goal is None:
        attached = [a.prop for a in program.attachments if a.kind == "assert"]
        goal = attached[-1] if attached else None
    if goal is not None:
        cfg.goal = PropertyCheck(goal.line, compile_fn(goal.predicate, index, mask))
    return cfg
