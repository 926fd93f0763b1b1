"""Gauge expressions: a tiny infix language evaluated over reals or jets.

Grammar (see ``docs/grammar.ebnf``)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;          (* exponent must be constant *)
    atom    = number | variable | func "(" expr ")" | "(" expr ")" ;
    variable = ("x" | "y") digit { digit } ;
    func    = "sqrt" | "exp" | "log" | "sin" | "cos" ;

``^`` binds tighter than unary minus, so ``-y1^2`` is ``-(y1^2)``; it is
right associative.  Variables are 1-based chart coordinates.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

from . import jets

FUNCTIONS = {
    "sqrt": jets.sqrt,
    "exp": jets.exp,
    "log": jets.log,
    "sin": jets.sin,
    "cos": jets.cos,
}

MAX_DEPTH = 100


class ExprError(ValueError):
    """Parse failure with the character offset where it was detected."""

    def __init__(self, message: str, position: int):
        self.message = message
        self.position = position
        super().__init__(f"{message} at offset {position}")


# ---------------------------------------------------------------------------
# tree


@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self):
        return repr(float(self.value))


@dataclass(frozen=True)
class Var:
    kind: str  # "x" or "y"
    index: int  # 1-based

    def __str__(self):
        return f"{self.kind}{self.index}"


@dataclass(frozen=True)
class Neg:
    operand: "Node"

    def __str__(self):
        return f"(-{self.operand})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: float

    def __str__(self):
        e = repr(float(self.exponent))
        if self.exponent < 0:
            e = f"({e})"
        return f"({self.base}^{e})"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"

    def __str__(self):
        return f"{self.func}({self.arg})"


Node = Union[Num, Var, Neg, BinOp, Pow, Call]


@dataclass(frozen=True)
class GaugeExpr:
    """A parsed expression together with the chart dimension it was checked against."""

    root: Node
    dimension: int
    text: str = ""

    def __str__(self):
        return str(self.root)

    def variables(self):
        found = set()

        def walk(node):
            if isinstance(node, Var):
                found.add(str(node))
            elif isinstance(node, (Neg, Call)):
                walk(node.operand if isinstance(node, Neg) else node.arg)
            elif isinstance(node, BinOp):
                walk(node.left)
                walk(node.right)
            elif isinstance(node, Pow):
                walk(node.base)

        walk(self.root)
        return found

    def uses_x(self):
        return any(v.startswith("x") for v in self.variables())


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExprError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text, dimension):
        self.text = text
        self.dim = dimension
        self.toks = _tokenize(text)
        self.i = 0
        self.depth = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, val, pos = self.peek()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprError(f"expected {value!r}, found {found}", pos)
        return self.take()

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise ExprError("expression nested too deeply", self.peek()[2])

    def parse(self):
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprError(f"unexpected {val!r}", pos)
        return node

    def expr(self):
        self.enter()
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        self.depth -= 1
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            self.enter()
            node = Neg(self.unary())
            self.depth -= 1
            return node
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            pos = self.take()[2]
            self.enter()
            exponent = self.unary()
            self.depth -= 1
            value = _constant_value(exponent)
            if value is None:
                raise ExprError("exponent must be a constant", pos + 1)
            return Pow(base, value)
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            v = float(val)
            if not math.isfinite(v):
                raise ExprError("numeric literal out of range", pos)
            return Num(v)
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            m = re.fullmatch(r"([xy])(\d+)", val)
            if m is None:
                raise ExprError(f"unknown identifier {val!r}", pos)
            idx = int(m.group(2))
            if idx < 1 or idx > self.dim:
                raise ExprError(f"variable {val} exceeds dimension {self.dim}", pos)
            return Var(m.group(1), idx)
        if (kind, val) == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprError(f"unexpected {found}", pos)


def _constant_value(node):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        v = _constant_value(node.operand)
        return None if v is None else -v
    if isinstance(node, Pow):
        v = _constant_value(node.base)
        if v is None:
            return None
        try:
            out = float(v) ** node.exponent
        except (OverflowError, ZeroDivisionError):
            return None
        return out if isinstance(out, float) and math.isfinite(out) else None
    return None


def parse(text: str, dimension: int) -> GaugeExpr:
    """Parse ``text`` into a :class:`GaugeExpr`; raises :class:`ExprError`."""
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    if dimension < 1:
        raise ValueError("dimension must be positive")
    if not text.strip():
        raise ExprError("empty expression", 0)
    return GaugeExpr(_Parser(text, dimension).parse(), dimension, text)


# ---------------------------------------------------------------------------
# evaluation


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[str(node)]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a = _eval(node.left, env)
        b = _eval(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if isinstance(b, jets.Jet):
            return a / b
        return a * jets.reciprocal(b)
    if isinstance(node, Pow):
        return jets.power(_eval(node.base, env), node.exponent)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, env))
    raise TypeError(f"unknown node {node!r}")


def evaluate(expr: GaugeExpr, bindings: Mapping[str, object]):
    """Evaluate over whatever the bindings hold (floats, arrays or jets)."""
    missing = expr.variables() - set(bindings)
    if missing:
        raise KeyError(f"unbound variables: {sorted(missing)}")
    return _eval(expr.root, bindings)


def bind(x=None, y=None):
    """Build a bindings map from coordinate sequences."""
    env = {}
    for kind, seq in (("x", x), ("y", y)):
        if seq is not None:
            for i, v in enumerate(seq):
                env[f"{kind}{i + 1}"] = v
    return env


class ExprGauge:
    """Callable adapter ``(x, y) -> F`` around a parsed expression."""

    def __init__(self, expr: GaugeExpr):
        self.expr = expr

    def __call__(self, x, y):
        return evaluate(self.expr, bind(x, y))

    def __repr__(self):
        return f"ExprGauge({self.expr.text or str(self.expr)!r})"


__all__ = [
    "BinOp", "Call", "ExprError", "ExprGauge", "GaugeExpr", "Neg", "Num", "Pow", "Var",
    "bind", "evaluate", "parse",
]
