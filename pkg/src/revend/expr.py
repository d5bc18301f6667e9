"""Arithmetic expressions in one variable ``t``.

Grammar (``^`` is right-associative and binds tighter than unary minus)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := primary ("^" unary)?
    primary := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

Identifiers are the variable ``t``, the constants ``pi`` and ``e`` and the
functions in :data:`FUNCTIONS`.  Errors report byte offsets into the source.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, List, Union

import numpy as np

from .errors import ExprSyntaxError, UnknownIdentifierError

FUNCTIONS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sinh": np.sinh, "cosh": np.cosh, "tanh": np.tanh,
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "abs": np.abs, "atan": np.arctan,
}
CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLE = "t"
ALLOWED = frozenset(FUNCTIONS) | frozenset(CONSTANTS) | {VARIABLE}


@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError("number literals are finite and non-negative")


@dataclass(frozen=True)
class Var:
    name: str = VARIABLE


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Const, Neg, BinOp, Call]

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(src: str) -> List[_Tok]:
    out = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", _byte(src, pos))
        kind = m.lastgroup
        if kind != "ws":
            out.append(_Tok(kind, m.group(), _byte(src, pos)))
        pos = m.end()
    out.append(_Tok("end", "", _byte(src, len(src))))
    return out


def _byte(src: str, i: int) -> int:
    return len(src[:i].encode("utf-8"))


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.cur.kind == "op" and self.cur.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise ExprSyntaxError(f"expected {text!r}", self.cur.offset)

    def expr(self) -> Expr:
        node = self.term()
        while self.cur.kind == "op" and self.cur.text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.cur.kind == "op" and self.cur.text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.cur
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.i += 1
            name = tok.text
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(name, arg)
            if name not in ALLOWED:
                raise UnknownIdentifierError(name, tok.offset, ALLOWED)
            if self.cur.kind == "op" and self.cur.text == "(":
                raise ExprSyntaxError(f"{name!r} is not a function", self.cur.offset)
            return Var(name) if name == VARIABLE else Const(name)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {what}", tok.offset)


def parse_expr(src: str) -> Expr:
    """Parse ``src`` into an expression tree."""
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0)
    p = _Parser(src)
    node = p.expr()
    if p.cur.kind != "end":
        raise ExprSyntaxError(f"unexpected {p.cur.text!r}", p.cur.offset)
    return node


# binding strength used by the printer
_LEVEL = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def to_source(node: Expr) -> str:
    """Print with the minimal parentheses needed to parse back to ``node``."""
    return _print(node, 0)


def _print(node: Expr, ctx: int) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({_print(node.arg, 0)})"
    if isinstance(node, Neg):
        level = _LEVEL["neg"]
        text = "-" + _print(node.operand, level)
    elif node.op == "^":
        level = _LEVEL["^"]
        text = f"{_print(node.left, _ATOM)}^{_print(node.right, _LEVEL['neg'])}"
    else:
        level = _LEVEL[node.op]
        text = f"{_print(node.left, level)} {node.op} {_print(node.right, level + 1)}"
    return f"({text})" if level < ctx else text


_BINARY = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power}


def evaluate(node: Expr, t) -> np.ndarray:
    """Evaluate ``node`` elementwise at ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval(node, t)
    return np.broadcast_to(out, t.shape).astype(float) if np.shape(out) != t.shape else out


def _eval(node: Expr, t):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return np.negative(_eval(node.operand, t))
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, t))
    return _BINARY[node.op](np.asarray(_eval(node.left, t), dtype=float), _eval(node.right, t))


def compile_expr(src_or_node: Union[str, Expr]) -> Callable:
    """Return a numpy function t -> value."""
    node = parse_expr(src_or_node) if isinstance(src_or_node, str) else src_or_node
    return lambda t: evaluate(node, t)
