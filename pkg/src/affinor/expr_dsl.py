"""Scalar expression language with forward-mode differentiation.

Grammar (whitespace insensitive, no implicit multiplication)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?            # right associative
    atom   := NUMBER | VARIABLE | FUNC '(' expr ')' | '(' expr ')'

Variables are ``x1..xN`` (ambient coordinates) or ``u1..uN`` (parameter
coordinates), 1-based, bounded by the declared arity.  Functions:
sin cos tan exp log sqrt sinh cosh.

Differentiation is forward mode with second-order jets, so gradients and
hessians are exact to rounding (no truncation error).  Expressions are
immutable after parsing and evaluation is pure, hence reentrant.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Expression",
    "Jet2",
    "ParseError",
    "EvalError",
    "parse",
    "evaluate",
    "evaluate_jet",
    "format_expression",
]

FUNCTIONS = ("cos", "cosh", "exp", "log", "sin", "sinh", "sqrt", "tan")

_VAR_RE = re.compile(r"[xu]([0-9]+)\Z")
_TOKEN_RE = re.compile(
    r"(?P<num>[0-9]+\.?[0-9]*(?:[eE][+-]?[0-9]+)?|\.[0-9]+(?:[eE][+-]?[0-9]+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)


class ParseError(ValueError):
    """Syntax or arity error, with the byte offset of the offending token."""

    def __init__(self, message: str, offset: int, expected: tuple[str, ...] = ()):
        self.offset = offset
        self.expected = tuple(expected)
        text = f"{message} at offset {offset}"
        if expected:
            text += " (expected " + ", ".join(expected) + ")"
        super().__init__(text)


class EvalError(ArithmeticError):
    """Domain error during evaluation, naming the offending subexpression."""

    def __init__(self, message: str, subexpression: str = ""):
        self.subexpression = subexpression
        if subexpression:
            message = f"{message} in '{subexpression}'"
        super().__init__(message)


@dataclass(frozen=True)
class Num:
    value: float
    span: tuple[int, int]


@dataclass(frozen=True)
class Var:
    index: int  # 0-based
    name: str
    span: tuple[int, int]


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"
    span: tuple[int, int]


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"
    span: tuple[int, int]


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"
    span: tuple[int, int]


Node = Union[Num, Var, Unary, Binary, Call]


@dataclass(frozen=True, eq=False)
class Expression:
    """A parsed scalar expression in a fixed number of variables."""

    source: str
    arity: int
    root: Node

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Expression({self.source!r}, arity={self.arity})"


@dataclass(frozen=True)
class Jet2:
    """Value with first and (optionally) second derivatives at a point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray | None


# ---------------------------------------------------------------------------
# tokenizer / parser


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    size = len(source)
    while pos < size:
        ch = source[pos]
        if ch.isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(source, pos)
        if match is None:
            raise ParseError(f"unexpected character '{ch}'", pos)
        if match.lastgroup == "num":
            tokens.append(("num", match.group(), pos))
        elif match.lastgroup == "ident":
            tokens.append(("ident", match.group(), pos))
        else:
            tokens.append((match.group(), match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", size))
    return tokens


_ATOM_EXPECTED = ("number", "variable", "function", "'('", "'-'")


class _Parser:
    def __init__(self, tokens: list[tuple[str, str, int]], arity: int):
        self.tokens = tokens
        self.arity = arity
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def unexpected(self, expected: tuple[str, ...]) -> ParseError:
        kind, text, offset = self.peek()
        shown = "end of input" if kind == "end" else f"'{text}'"
        return ParseError(f"unexpected {shown}", offset, expected)

    def expect(self, kind: str) -> tuple[str, str, int]:
        if self.peek()[0] != kind:
            raise self.unexpected((f"'{kind}'",))
        return self.advance()

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.peek()[0] in ("+", "-"):
            op, _, _ = self.advance()
            right = self.parse_term()
            node = Binary(op, node, right, (node.span[0], right.span[1]))
        return node

    def parse_term(self) -> Node:
        node = self.parse_unary()
        while self.peek()[0] in ("*", "/"):
            op, _, _ = self.advance()
            right = self.parse_unary()
            node = Binary(op, node, right, (node.span[0], right.span[1]))
        return node

    def parse_unary(self) -> Node:
        if self.peek()[0] == "-":
            _, _, offset = self.advance()
            operand = self.parse_unary()
            return Unary("-", operand, (offset, operand.span[1]))
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        if self.peek()[0] == "^":
            self.advance()
            exponent = self.parse_unary()  # right associative
            return Binary("^", base, exponent, (base.span[0], exponent.span[1]))
        return base

    def parse_atom(self) -> Node:
        kind, text, offset = self.peek()
        if kind == "num":
            self.advance()
            return Num(float(text), (offset, offset + len(text)))
        if kind == "(":
            self.advance()
            node = self.parse_expr()
            _, _, close = self.expect(")")
            return node
        if kind == "ident":
            self.advance()
            var = _VAR_RE.match(text)
            if var is not None:
                index = int(var.group(1))
                if index < 1 or index > self.arity:
                    raise ParseError(
                        f"variable {text} exceeds arity {self.arity}", offset
                    )
                return Var(index - 1, text, (offset, offset + len(text)))
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.parse_expr()
                _, _, close = self.expect(")")
                return Call(text, arg, (offset, close + 1))
            raise ParseError(f"unknown identifier '{text}'", offset)
        raise self.unexpected(_ATOM_EXPECTED)


def parse(source: str, arity: int) -> Expression:
    """Parse ``source`` into an expression over ``arity`` variables."""
    if arity < 0:
        raise ValueError("arity must be non-negative")
    if not source or not source.strip():
        raise ParseError("empty expression", 0, _ATOM_EXPECTED)
    parser = _Parser(_tokenize(source), arity)
    root = parser.parse_expr()
    if parser.peek()[0] != "end":
        raise parser.unexpected(("'+'", "'-'", "'*'", "'/'", "'^'", "end of input"))
    return Expression(source, arity, root)


# ---------------------------------------------------------------------------
# printing (round-trips through parse)


def _fmt(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        return f"(-{_fmt(node.operand)})"
    if isinstance(node, Binary):
        return f"({_fmt(node.left)} {node.op} {_fmt(node.right)})"
    return f"{node.func}({_fmt(node.arg)})"


def format_expression(expr: Expression) -> str:
    """Render a canonical, fully parenthesized form of the expression."""
    return _fmt(expr.root)


# ---------------------------------------------------------------------------
# plain evaluation


def _snippet(expr: Expression, node: Node) -> str:
    return expr.source[node.span[0] : node.span[1]]


def _contains_var(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, Num):
        return False
    if isinstance(node, Unary):
        return _contains_var(node.operand)
    if isinstance(node, Binary):
        return _contains_var(node.left) or _contains_var(node.right)
    return _contains_var(node.arg)


def _pow_mode(expr: Expression, node: Binary, point) -> tuple[str, float]:
    """Classify an exponent as integer constant, real constant, or dynamic."""
    if _contains_var(node.right):
        return "dynamic", 0.0
    c = _eval(expr, node.right, point)
    if c == round(c) and abs(c) <= 1e9:
        return "int", c
    return "const", c


def _eval(expr: Expression, node: Node, point) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(point[node.index])
    if isinstance(node, Unary):
        return -_eval(expr, node.operand, point)
    if isinstance(node, Binary):
        left = _eval(expr, node.left, point)
        if node.op == "+":
            return left + _eval(expr, node.right, point)
        if node.op == "-":
            return left - _eval(expr, node.right, point)
        if node.op == "*":
            return left * _eval(expr, node.right, point)
        if node.op == "/":
            right = _eval(expr, node.right, point)
            if right == 0.0:
                raise EvalError("division by zero", _snippet(expr, node))
            return left / right
        # '^'
        mode, c = _pow_mode(expr, node, point)
        try:
            if mode == "int":
                if left == 0.0 and c < 0:
                    raise EvalError("zero raised to negative power", _snippet(expr, node))
                return left ** c
            if mode == "dynamic":
                c = _eval(expr, node.right, point)
            if left <= 0.0:
                raise EvalError(
                    "non-integer power of non-positive base", _snippet(expr, node)
                )
            return left ** c
        except OverflowError:
            raise EvalError("overflow", _snippet(expr, node)) from None
    # Call
    v = _eval(expr, node.arg, point)
    try:
        if node.func == "log":
            if v <= 0.0:
                raise EvalError("log of non-positive value", _snippet(expr, node))
            return math.log(v)
        if node.func == "sqrt":
            if v < 0.0:
                raise EvalError("sqrt of negative value", _snippet(expr, node))
            return math.sqrt(v)
        return getattr(math, node.func)(v)
    except OverflowError:
        raise EvalError("overflow", _snippet(expr, node)) from None


def evaluate(expr: Expression, point) -> float:
    """Evaluate the expression at ``point`` (length must equal the arity)."""
    if len(point) != expr.arity:
        raise ValueError(
            f"point has length {len(point)}, expression arity is {expr.arity}"
        )
    value = _eval(expr, expr.root, point)
    if not math.isfinite(value):
        raise EvalError("non-finite result", expr.source)
    return value


# ---------------------------------------------------------------------------
# jets: forward-mode first and second derivatives


class _Jet:
    __slots__ = ("v", "g", "h")

    def __init__(self, v: float, g: np.ndarray, h: np.ndarray | None):
        self.v = v
        self.g = g
        self.h = h


def _jconst(value: float, n: int, order: int) -> _Jet:
    return _Jet(value, np.zeros(n), np.zeros((n, n)) if order == 2 else None)


def _jvar(value: float, index: int, n: int, order: int) -> _Jet:
    g = np.zeros(n)
    g[index] = 1.0
    return _Jet(value, g, np.zeros((n, n)) if order == 2 else None)


def _jadd(a: _Jet, b: _Jet) -> _Jet:
    h = a.h + b.h if a.h is not None else None
    return _Jet(a.v + b.v, a.g + b.g, h)


def _jsub(a: _Jet, b: _Jet) -> _Jet:
    h = a.h - b.h if a.h is not None else None
    return _Jet(a.v - b.v, a.g - b.g, h)


def _jneg(a: _Jet) -> _Jet:
    return _Jet(-a.v, -a.g, -a.h if a.h is not None else None)


def _jmul(a: _Jet, b: _Jet) -> _Jet:
    h = None
    if a.h is not None:
        outer = np.outer(a.g, b.g)
        h = a.v * b.h + b.v * a.h + outer + outer.T
    return _Jet(a.v * b.v, a.v * b.g + b.v * a.g, h)


def _jcompose(u: _Jet, f0: float, f1: float, f2: float) -> _Jet:
    h = None
    if u.h is not None:
        h = f1 * u.h + f2 * np.outer(u.g, u.g)
    return _Jet(f0, f1 * u.g, h)


def _jpow_int(u: _Jet, k: int, n: int, order: int) -> _Jet:
    if k == 0:
        return _jconst(1.0, n, order)
    if k < 0:
        pos = _jpow_int(u, -k, n, order)
        return _jcompose(pos, 1.0 / pos.v, -1.0 / pos.v**2, 2.0 / pos.v**3)
    result = None
    base = u
    while k:
        if k & 1:
            result = base if result is None else _jmul(result, base)
        k >>= 1
        if k:
            base = _jmul(base, base)
    return result


def _jet_walk(expr: Expression, node: Node, point, n: int, order: int) -> _Jet:
    if isinstance(node, Num):
        return _jconst(node.value, n, order)
    if isinstance(node, Var):
        return _jvar(float(point[node.index]), node.index, n, order)
    if isinstance(node, Unary):
        return _jneg(_jet_walk(expr, node.operand, point, n, order))
    if isinstance(node, Binary):
        if node.op == "^":
            mode, c = _pow_mode(expr, node, point)
            base = _jet_walk(expr, node.left, point, n, order)
            if mode == "int":
                k = int(c)
                if base.v == 0.0 and k < 0:
                    raise EvalError("zero raised to negative power", _snippet(expr, node))
                return _jpow_int(base, k, n, order)
            if mode == "const":
                if base.v <= 0.0:
                    raise EvalError(
                        "non-integer power of non-positive base", _snippet(expr, node)
                    )
                bv = base.v
                return _jcompose(
                    base, bv**c, c * bv ** (c - 1.0), c * (c - 1.0) * bv ** (c - 2.0)
                )
            if _eval(expr, node.left, point) <= 0.0:
                raise EvalError(
                    "non-integer power of non-positive base", _snippet(expr, node)
                )
            expo = _jet_walk(expr, node.right, point, n, order)
            lg = _jcompose(base, math.log(base.v), 1.0 / base.v, -1.0 / base.v**2)
            prod = _jmul(expo, lg)
            ev = math.exp(prod.v)
            return _jcompose(prod, ev, ev, ev)
        left = _jet_walk(expr, node.left, point, n, order)
        right = _jet_walk(expr, node.right, point, n, order)
        if node.op == "+":
            return _jadd(left, right)
        if node.op == "-":
            return _jsub(left, right)
        if node.op == "*":
            return _jmul(left, right)
        if right.v == 0.0:
            raise EvalError("division by zero", _snippet(expr, node))
        recip = _jcompose(right, 1.0 / right.v, -1.0 / right.v**2, 2.0 / right.v**3)
        return _jmul(left, recip)
    # Call
    u = _jet_walk(expr, node.arg, point, n, order)
    v = u.v
    if node.func == "sin":
        return _jcompose(u, math.sin(v), math.cos(v), -math.sin(v))
    if node.func == "cos":
        return _jcompose(u, math.cos(v), -math.sin(v), -math.cos(v))
    if node.func == "tan":
        t = math.tan(v)
        d = 1.0 + t * t
        return _jcompose(u, t, d, 2.0 * t * d)
    if node.func == "exp":
        try:
            e = math.exp(v)
        except OverflowError:
            raise EvalError("overflow", _snippet(expr, node)) from None
        return _jcompose(u, e, e, e)
    if node.func == "log":
        if v <= 0.0:
            raise EvalError("log of non-positive value", _snippet(expr, node))
        return _jcompose(u, math.log(v), 1.0 / v, -1.0 / v**2)
    if node.func == "sqrt":
        if v <= 0.0:
            raise EvalError(
                "sqrt requires a positive argument when differentiating",
                _snippet(expr, node),
            )
        s = math.sqrt(v)
        return _jcompose(u, s, 0.5 / s, -0.25 / (v * s))
    if node.func == "sinh":
        return _jcompose(u, math.sinh(v), math.cosh(v), math.sinh(v))
    # cosh
    return _jcompose(u, math.cosh(v), math.sinh(v), math.cosh(v))


def evaluate_jet(expr: Expression, point, order: int = 2) -> Jet2:
    """Evaluate value, gradient and (for ``order`` 2) hessian at ``point``."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if len(point) != expr.arity:
        raise ValueError(
            f"point has length {len(point)}, expression arity is {expr.arity}"
        )
    jet = _jet_walk(expr, expr.root, point, expr.arity, order)
    if not math.isfinite(jet.v):
        raise EvalError("non-finite result", expr.source)
    gradient = np.asarray(jet.g, dtype=float)
    gradient.setflags(write=False)
    hessian = None
    if jet.h is not None:
        hessian = np.asarray(jet.h, dtype=float)
        hessian.setflags(write=False)
    return Jet2(jet.v, gradient, hessian)
