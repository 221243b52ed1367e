"""Recursive-descent parser for the C-like subset.

One statement per physical line: the line of a statement's first token is its
identity, and properties refer to statements by that line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    Assert,
    Assign,
    Assume,
    Binary,
    Cast,
    Decl,
    DeclItem,
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
    Variable,
    While,
    iter_expr,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int = 1):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # num | id | op | marker | eof
    text: str
    line: int
    col: int


_OPERATORS = sorted(
    """++ -- += -= *= /= %= == != <= >= && || << >> + - * / % < > ! = ( ) { } ; , & | ^ ~ ? : [ ]""".split(),
    key=len,
    reverse=True,
)
_UNSUPPORTED = {"<<", ">>", "&", "|", "^", "~", "?", ":", "[", "]"}
_MARKER_RE = re.compile(r"//\s*Line\s+(\w+)\s*$")
_NUM_RE = re.compile(r"(0[xX][0-9a-fA-F]+|\d+)([uUlL]*)")
_ID_RE = re.compile(r"[A-Za-z_]\w*")

TYPE_WORDS = {"unsigned", "signed", "int", "char", "short", "long", "const"}
FIXED_TYPES = {"uint8_t": 8, "uint16_t": 16, "uint32_t": 32, "uint64_t": 64}
CONSTANTS = {
    "UCHAR_MAX": 0xFF,
    "USHRT_MAX": 0xFFFF,
    "UINT_MAX": 0xFFFFFFFF,
    "ULONG_MAX": 0xFFFFFFFFFFFFFFFF,
    "true": 1,
    "false": 0,
}
ASSUME_NAMES = {"assume", "__VERIFIER_assume"}
ASSERT_NAMES = {"assert", "__VERIFIER_assert"}
RESERVED = {"while", "if", "else", "return", "main"} | TYPE_WORDS | set(FIXED_TYPES)


def is_nondet_name(name: str) -> bool:
    return name == "rand" or name.startswith("__VERIFIER_nondet_")


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    lines = source.split("\n")
    in_block = False
    for lineno, raw in enumerate(lines, start=1):
        i = 0
        line_tokens: list[Token] = []
        if not in_block and raw.lstrip().startswith("#"):
            continue
        while i < len(raw):
            if in_block:
                end = raw.find("*/", i)
                if end < 0:
                    i = len(raw)
                    continue
                in_block = False
                i = end + 2
                continue
            ch = raw[i]
            if ch in " \t\r\f\v":
                i += 1
                continue
            if raw.startswith("/*", i):
                in_block = True
                i += 2
                continue
            if raw.startswith("//", i):
                m = _MARKER_RE.match(raw, i)
                if m:
                    line_tokens.append(Token("marker", m.group(1), lineno, i + 1))
                break
            m = _NUM_RE.match(raw, i)
            if m and (ch.isdigit()):
                line_tokens.append(Token("num", m.group(0), lineno, i + 1))
                i = m.end()
                continue
            m = _ID_RE.match(raw, i)
            if m:
                line_tokens.append(Token("id", m.group(0), lineno, i + 1))
                i = m.end()
                continue
            for op in _OPERATORS:
                if raw.startswith(op, i):
                    line_tokens.append(Token("op", op, lineno, i + 1))
                    i += len(op)
                    break
            else:
                raise ParseError(f"unexpected character {ch!r}", lineno, i + 1)
        # a marker comment only counts when it is alone on its line
        if len(line_tokens) > 1:
            line_tokens = [t for t in line_tokens if t.kind != "marker"]
        tokens.extend(line_tokens)
    if in_block:
        raise ParseError("unterminated block comment", len(lines), 1)
    tokens.append(Token("eof", "", len(lines), 1))
    return tokens


def parse_number(text: str) -> int:
    body = _NUM_RE.fullmatch(text).group(1)
    if body.lower().startswith("0x"):
        return int(body, 16)
    if len(body) > 1 and body.startswith("0"):
        return int(body, 8)
    return int(body)


def type_bits(words: list[str], line: int, col: int) -> int:
    words = [w for w in words if w != "const"]
    if len(words) == 1 and words[0] in FIXED_TYPES:
        return FIXED_TYPES[words[0]]
    if not words or any(w not in TYPE_WORDS for w in words):
        raise ParseError(f"unsupported type {' '.join(words)!r}", line, col)
    if "char" in words:
        return 8
    if "short" in words:
        return 16
    if "long" in words:
        return 64
    return 32


class _Parser:
    def __init__(self, source: str, width: int, variables: dict[str, Variable] | None = None,
                 allow_nondet: bool = True):
        self.tokens = tokenize(source)
        self.pos = 0
        self.width = width
        self.variables: dict[str, Variable] = dict(variables or {})
        self.check_vars = True
        self.allow_nondet = allow_nondet
        self.used_lines: set[int] = set()
        self.markers: set[str] = set()

    # ------------------------------------------------------------ helpers
    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind in ("op", "id") and tok.text == text

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text or tok.kind not in ("op", "id"):
            found = tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", tok.line, tok.col)
        return tok

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col)

    def claim_line(self, tok: Token) -> int:
        if tok.line in self.used_lines:
            raise self.error(f"more than one statement on line {tok.line}", tok)
        self.used_lines.add(tok.line)
        return tok.line

    # ------------------------------------------------------------ program
    def program(self) -> Program:
        wrapped = False
        if self.at("int") and self.peek(1).text == "main":
            wrapped = True
            self.next()
            self.next()
            self.expect("(")
            if self.at("void"):
                self.next()
            self.expect(")")
            self.expect("{")
            stmts = self.statements(until="}")
            self.expect("}")
        else:
            stmts = self.statements(until=None)
        tok = self.peek()
        if tok.kind != "eof":
            raise self.error(f"unexpected {tok.text!r} after program end", tok)
        return Program(
            statements=tuple(stmts),
            variables=tuple(self.variables.values()),
            width=self.width,
            wrapped=wrapped,
        )

    def statements(self, until: str | None) -> list[Stmt]:
        out: list[Stmt] = []
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                if until is not None:
                    raise self.error(f"expected {until!r} before end of input", tok)
                return out
            if until is not None and tok.kind == "op" and tok.text == until:
                return out
            out.extend(self.statement())

    def block(self) -> tuple[Stmt, ...]:
        if self.at("{"):
            self.next()
            body = self.statements(until="}")
            self.expect("}")
            return tuple(body)
        return tuple(self.statement())

    def statement(self) -> list[Stmt]:
        tok = self.peek()
        if tok.kind == "marker":
            self.next()
            if tok.text in self.markers:
                raise self.error(f"duplicate marker {tok.text!r}", tok)
            self.markers.add(tok.text)
            return [Marker(self.claim_line(tok), tok.text)]
        if tok.kind == "op" and tok.text == ";":
            self.next()
            return []
        if tok.kind == "op" and tok.text == "{":
            return list(self.block())
        if tok.kind == "op" and tok.text in ("++", "--"):
            line = self.claim_line(tok)
            self.next()
            name = self.variable_name()
            self.expect(";")
            return [Assign(line, name, tok.text, None, prefix=True)]
        if tok.kind != "id":
            raise self.error(f"unexpected {tok.text or 'end of input'!r}", tok)
        word = tok.text
        if word == "extern":
            # prototype declarations for verifier intrinsics carry no behaviour
            while not self.at(";"):
                if self.peek().kind == "eof":
                    raise self.error("unterminated extern declaration")
                self.next()
            self.next()
            return []
        if word in TYPE_WORDS or word in FIXED_TYPES:
            return [self.declaration()]
        if word == "while":
            line = self.claim_line(tok)
            self.next()
            cond = self.paren_condition()
            return [While(line, cond, self.block())]
        if word == "if":
            return [self.if_statement()]
        if word == "return":
            line = self.claim_line(tok)
            self.next()
            value = None
            if not self.at(";"):
                value = self.expression(allow_nondet=False)
            self.expect(";")
            return [Return(line, value)]
        if word in ASSUME_NAMES or word in ASSERT_NAMES:
            line = self.claim_line(tok)
            self.next()
            cond = self.paren_condition(allow_nondet=False)
            self.expect(";")
            return [Assume(line, cond) if word in ASSUME_NAMES else Assert(line, cond)]
        if word in ("else", "for", "do", "goto", "break", "continue", "switch", "void"):
            raise self.error(f"{word!r} is outside the supported subset", tok)
        return [self.assignment()]

    def if_statement(self) -> If:
        tok = self.expect("if")
        line = self.claim_line(tok)
        cond = self.paren_condition()
        then = self.block()
        orelse: tuple[Stmt, ...] = ()
        if self.at("else"):
            self.next()
            if self.at("if"):
                orelse = (self.if_statement(),)
            else:
                orelse = self.block()
        return If(line, cond, then, orelse)

    def paren_condition(self, allow_nondet: bool = True) -> Expr:
        if not self.at("("):
            raise self.error("expected '(' before condition")
        self.next()
        cond = self.expression(allow_nondet=allow_nondet)
        self.expect(")")
        return cond

    def declaration(self) -> Decl:
        first = self.peek()
        line = self.claim_line(first)
        words = []
        while self.peek().kind == "id" and (self.peek().text in TYPE_WORDS or self.peek().text in FIXED_TYPES):
            words.append(self.next().text)
        bits = type_bits(words, first.line, first.col)
        ctype = " ".join(words)
        items = []
        while True:
            tok = self.next()
            if tok.kind != "id" or tok.text in RESERVED:
                raise self.error("expected a variable name", tok)
            name = tok.text
            if name in self.variables:
                raise self.error(f"redeclaration of {name!r}", tok)
            if name in CONSTANTS or name in ASSUME_NAMES or name in ASSERT_NAMES or is_nondet_name(name):
                raise self.error(f"{name!r} is reserved", tok)
            init = None
            if self.at("="):
                self.next()
                init = self.expression(allow_nondet=True)
            self.variables[name] = Variable(name, ctype, min(bits, self.width))
            items.append(DeclItem(name, init))
            if self.at(","):
                self.next()
                continue
            self.expect(";")
            break
        return Decl(line, ctype, tuple(items))

    def assignment(self) -> Assign:
        tok = self.peek()
        line = self.claim_line(tok)
        name = self.variable_name()
        op_tok = self.next()
        if op_tok.text in ("++", "--"):
            self.expect(";")
            return Assign(line, name, op_tok.text, None)
        if op_tok.text not in ("=", "+=", "-=", "*=", "/=", "%="):
            raise self.error(f"expected an assignment, found {op_tok.text!r}", op_tok)
        value = self.expression(allow_nondet=True)
        self.expect(";")
        return Assign(line, name, op_tok.text, value)

    def variable_name(self) -> str:
        tok = self.next()
        if tok.kind != "id" or tok.text in RESERVED:
            raise self.error(f"expected a variable, found {tok.text!r}", tok)
        self.check_declared(tok)
        return tok.text

    def check_declared(self, tok: Token) -> None:
        if self.check_vars and tok.text not in self.variables:
            raise self.error(f"undeclared variable {tok.text!r}", tok)

    # ------------------------------------------------------------ expressions
    def expression(self, allow_nondet: bool) -> Expr:
        start = self.peek()
        saved = self.allow_nondet
        self.allow_nondet = allow_nondet and saved
        try:
            e = self.binary(0)
        finally:
            self.allow_nondet = saved
        nondets = [n for n in iter_expr(e) if isinstance(n, Nondet)]
        if len(nondets) > 1:
            raise self.error("at most one nondeterministic call per expression", start)
        if nondets and _nondet_under_logic(e):
            raise self.error("nondeterministic call under '&&'/'||' is not supported", start)
        return e

    _LEVELS = [("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*", "/", "%")]

    def binary(self, level: int) -> Expr:
        if level == len(self._LEVELS):
            return self.unary()
        left = self.binary(level + 1)
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in self._LEVELS[level]:
                self.next()
                right = self.binary(level + 1)
                left = Binary(tok.text, left, right)
            elif tok.kind == "op" and tok.text in _UNSUPPORTED:
                raise self.error(f"operator {tok.text!r} is outside the supported subset", tok)
            else:
                return left

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("!", "-"):
            self.next()
            return Unary(tok.text, self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.next()
            return self.unary()
        if tok.kind == "op" and tok.text == "(" and self._cast_ahead():
            self.next()
            words = []
            while not self.at(")"):
                words.append(self.next().text)
            self.expect(")")
            bits = type_bits(words, tok.line, tok.col)
            return Cast(" ".join(w for w in words if w != "const"), min(bits, self.width), self.unary())
        return self.primary()

    def _cast_ahead(self) -> bool:
        nxt = self.peek(1)
        return nxt.kind == "id" and (nxt.text in TYPE_WORDS or nxt.text in FIXED_TYPES)

    def primary(self) -> Expr:
        tok = self.next()
        if tok.kind == "num":
            return Num(parse_number(tok.text), tok.text)
        if tok.kind == "id":
            if is_nondet_name(tok.text) and self.at("("):
                if not self.allow_nondet:
                    raise self.error("nondeterministic call not allowed here", tok)
                self.expect("(")
                self.expect(")")
                return Nondet(tok.text)
            if tok.text in CONSTANTS:
                return Num(CONSTANTS[tok.text], tok.text)
            if tok.text in RESERVED:
                raise self.error(f"unexpected keyword {tok.text!r}", tok)
            if self.at("("):
                raise self.error(f"call to {tok.text!r} is outside the supported subset", tok)
            self.check_declared(tok)
            return Var(tok.text)
        if tok.kind == "op" and tok.text == "(":
            e = self.binary(0)
            self.expect(")")
            return e
        if tok.kind == "op" and tok.text in _UNSUPPORTED:
            raise self.error(f"operator {tok.text!r} is outside the supported subset", tok)
        raise self.error(f"unexpected {tok.text or 'end of input'!r} in expression", tok)


def _nondet_under_logic(e: Expr, under: bool = False) -> bool:
    if isinstance(e, Nondet):
        return under
    if isinstance(e, Binary):
        inner = under or e.op in ("&&", "||")
        return _nondet_under_logic(e.left, inner) or _nondet_under_logic(e.right, inner)
    if isinstance(e, (Unary, Cast)):
        return _nondet_under_logic(e.operand, under)
    return False


def parse(source: str, width: int = 8) -> Program:
    """Parse program text. ``width`` caps every variable's bit-width."""
    if width < 1:
        raise ValueError("width must be positive")
    return _Parser(source, width).program()


def parse_expr(text: str, program: Program | None = None) -> Expr:
    """Parse a side-effect-free predicate.

    With ``program`` given, every variable must be declared in it; without it,
    any identifier is accepted (used for script keys).
    """
    width = program.width if program is not None else 64
    variables = {v.name: v for v in program.variables} if program is not None else None
    p = _Parser(text, width, variables, allow_nondet=False)
    p.check_vars = program is not None
    e = p.expression(allow_nondet=False)
    tok = p.peek()
    if tok.kind != "eof":
        raise p.error(f"unexpected {tok.text!r} after expression", tok)
    return e


def parse_property(text: str, line: int, program: Program) -> Property:
    return Property(parse_expr(text, program), line)
