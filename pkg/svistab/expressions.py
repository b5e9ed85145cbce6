"""Arithmetic expressions over p and x, compiled to Python closures.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | FUNC '(' expr (',' expr)* ')' | '(' expr ')'

Names are ``p``/``x`` (first component) and ``p1``..``p4``/``x1``..``x4``.
Functions are abs, sqrt, min and max. ``-x^2`` parses as ``-(x^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from operator import add, mul, sub
from typing import Callable, Sequence

from .config import MAX_DIM
from .errors import ExpressionError

Node = Callable[[Sequence[float], Sequence[float]], float]

TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)

VARIABLE_RE = re.compile(r"^(?P<var>[px])(?P<index>[1-9]\d*)?$")


def _div(a: float, b: float) -> float:
    if b == 0.0:
        raise ZeroDivisionError("division by zero")
    return a / b


def _pow(a: float, b: float) -> float:
    return math.pow(a, b)


def _sqrt(a: float) -> float:
    return math.sqrt(a)


FUNCTIONS: dict[str, tuple[int, Callable[..., float]]] = {
    "abs": (1, abs),
    "sqrt": (1, _sqrt),
    "min": (2, min),
    "max": (2, max),
}

BINARY: dict[str, Callable[[float, float], float]] = {"+": add, "-": sub, "*": mul, "/": _div, "^": _pow}


@dataclass(frozen=True)
class Token:
    kind: str  # number, name, op, eof
    text: str
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionError(f"unexpected character {text[col]!r}", text, col + 1)
        kind = m.lastgroup
        tokens.append(Token(kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    tokens.append(Token("eof", "", len(text) + 1))
    return tokens


class Parser:
    """Recursive-descent parser producing a closure tree."""

    def __init__(self, text: str, p_dim: int = MAX_DIM, x_dim: int = MAX_DIM):
        self.text = text
        self.tokens = tokenize(text)
        self.cursor = 0
        self.dims = {"p": p_dim, "x": x_dim}
        self.variables: set[str] = set()

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            self.fail(f"unexpected {tok.text!r} after expression", tok)
        return node

    # Tokenizer helpers

    def peek(self) -> Token:
        return self.tokens[self.cursor]

    def next(self) -> Token:
        tok = self.tokens[self.cursor]
        self.cursor += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            self.fail(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok)
        return tok

    def fail(self, message: str, tok: Token):
        raise ExpressionError(message, self.text, tok.column)

    # Grammar functions

    def expr(self) -> Node:
        node = self.term()
        while self.peek().text in ("+", "-"):
            node = _binary(BINARY[self.next().text], node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().text in ("*", "/"):
            node = _binary(BINARY[self.next().text], node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek().text == "-":
            self.next()
            inner = self.unary()
            return lambda p, x: -inner(p, x)
        if self.peek().text == "+":
            self.next()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek().text == "^":
            self.next()
            return _binary(_pow, base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.next()
        if tok.kind == "number":
            value = float(tok.text)
            return lambda p, x: value
        if tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            if tok.text in FUNCTIONS:
                return self.call(tok)
            return self.variable(tok)
        self.fail(f"unexpected {tok.text or 'end of input'!r}", tok)

    def call(self, tok: Token) -> Node:
        arity, fn = FUNCTIONS[tok.text]
        self.expect("(")
        args = [self.expr()]
        while self.peek().text == ",":
            self.next()
            args.append(self.expr())
        self.expect(")")
        if arity == 1 and len(args) != 1:
            self.fail(f"{tok.text} takes exactly one argument", tok)
        if arity == 2 and len(args) < 2:
            self.fail(f"{tok.text} takes at least two arguments", tok)
        if len(args) == 1:
            (arg,) = args
            return lambda p, x: fn(arg(p, x))
        return lambda p, x: fn(a(p, x) for a in args)

    def variable(self, tok: Token) -> Node:
        m = VARIABLE_RE.match(tok.text)
        if m is None:
            self.fail(f"unknown name {tok.text!r}", tok)
        var = m.group("var")
        index = int(m.group("index") or 1) - 1
        if index >= self.dims[var]:
            self.fail(f"{tok.text} exceeds the {var}-dimension {self.dims[var]}", tok)
        self.variables.add(f"{var}{index + 1}")
        if var == "p":
            return lambda p, x: p[index]
        return lambda p, x: x[index]


def _binary(op: Callable[[float, float], float], left: Node, right: Node) -> Node:
    return lambda p, x: op(left(p, x), right(p, x))


@dataclass(frozen=True)
class Expression:
    """A compiled expression f(p, x) -> float."""
    text: str
    p_dim: int = 1
    x_dim: int = 1
    variables: frozenset[str] = field(default=frozenset(), compare=False)
    _node: Node | None = field(default=None, repr=False, compare=False)

    @classmethod
    def compile(cls, text: str, p_dim: int = 1, x_dim: int = 1) -> "Expression":
        parser = Parser(text, p_dim, x_dim)
        node = parser.parse()
        return cls(text, p_dim, x_dim, frozenset(parser.variables), node)

    @property
    def depends_on_p(self) -> bool:
        return any(v.startswith("p") for v in self.variables)

    def __call__(self, p: Sequence[float], x: Sequence[float]) -> float:
        try:
            value = float(self._node(p, x))
        except (ValueError, ZeroDivisionError, OverflowError) as e:
            raise ExpressionError(f"cannot evaluate {self.text!r} at p={list(p)}, x={list(x)}: {e}") from e
        if math.isnan(value):
            raise ExpressionError(f"{self.text!r} is undefined at p={list(p)}, x={list(x)}")
        return value


def compile_expression(text: str, p_dim: int = 1, x_dim: int = 1) -> Expression:
    return Expression.compile(text, p_dim, x_dim)
