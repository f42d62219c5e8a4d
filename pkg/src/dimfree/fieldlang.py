"""A small expression language for fields given in configuration files.

Expressions use the state variables ``x1 … xN``, inputs ``u1 … uM``, time
``t`` and the constant ``pi``. Supported operators are ``+ - * / ^`` and
unary minus; ``^`` binds tightest and associates to the right, unary
minus binds tighter than ``*`` and ``/``. Functions: ``sin cos tan exp log
sqrt abs sign``.

>>> e = parse("u1*sin(x1+x2)", state_dim=2, input_dim=2)
>>> e.evaluate([0.0, 1.5707963267948966], [2.0, 0.0])
2.0
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, DimfreeError

__all__ = [
    "ExprSyntaxError", "UnknownIdentifier", "ArityViolation", "EvalError",
    "Num", "Var", "Neg", "BinOp", "Call", "Expr", "ExprVector", "parse",
    "parse_vector_exprs", "to_text",
]


class ExprSyntaxError(DimfreeError, ValueError):
    """Malformed expression text; ``position`` is a byte offset."""

    def __init__(self, position: int, message: str):
        self.position = position
        self.message = message
        super().__init__(f"{message} at byte {position}")


class UnknownIdentifier(ExprSyntaxError):
    """A name that is neither a variable, constant nor function."""

    def __init__(self, position: int, name: str):
        self.name = name
        super().__init__(position, f"unknown identifier {name!r}")


class ArityViolation(ExprSyntaxError):
    """A variable index outside the declared state or input dimension."""

    def __init__(self, position: int, name: str, limit: int):
        self.name = name
        super().__init__(position, f"{name} is out of range (declared {limit})")


class EvalError(DimfreeError, ArithmeticError):
    """Domain error during evaluation.

    ``kind`` is one of ``DivByZero``, ``LogDomain``, ``SqrtDomain``,
    ``PowDomain``, ``Overflow`` or ``NonFinite``.
    """

    def __init__(self, kind: str, position: int):
        self.kind = kind
        self.position = position
        super().__init__(f"{kind} at byte {position}")


# ---------------------------------------------------------------- syntax tree

@dataclass(frozen=True)
class Num:
    value: float
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    kind: str  # "x", "u", "t" or "pi"
    index: int = 0
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: object
    pos: int = field(default=0, compare=False)


FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sign")

# ------------------------------------------------------------------ tokenizer

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ExprSyntaxError(len(text[:i].encode()),
                                  f"unexpected character {text[i]!r}")
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), len(text[:i].encode())))
        i = m.end()
    tokens.append(_Token("end", "", len(text.encode())))
    return tokens


# --------------------------------------------------------------------- parser

_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY = 30
_VARIABLE = re.compile(r"([xu])_?(\d+)$")


class _Parser:
    def __init__(self, text: str, state_dim: int, input_dim: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.state_dim = state_dim
        self.input_dim = input_dim

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.advance()
        if tok.text != text or tok.kind == "end":
            raise ExprSyntaxError(tok.pos, f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return tok

    def lbp(self, tok: _Token) -> int:
        return _INFIX.get(tok.text, 0) if tok.kind == "op" else 0

    def expression(self, rbp: int = 0):
        left = self.nud(self.advance())
        while rbp < self.lbp(self.peek()):
            left = self.led(self.advance(), left)
        return left

    def nud(self, tok: _Token):
        if tok.kind == "num":
            return Num(float(tok.text), tok.pos)
        if tok.kind == "name":
            return self.name(tok)
        if tok.text == "(":
            inner = self.expression()
            self.expect(")")
            return inner
        if tok.text == "-":
            return Neg(self.expression(_UNARY), tok.pos)
        if tok.text == "+":
            return self.expression(_UNARY)
        raise ExprSyntaxError(tok.pos, f"unexpected {tok.text or 'end of input'!r}")

    def led(self, tok: _Token, left):
        # ^ is right-associative: parse its right side one notch looser
        rbp = _INFIX[tok.text] - (tok.text == "^")
        return BinOp(tok.text, left, self.expression(rbp), tok.pos)

    def name(self, tok: _Token):
        name = tok.text
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expression()
            if self.peek().text == ",":
                raise ExprSyntaxError(self.peek().pos, f"{name} takes one argument")
            self.expect(")")
            return Call(name, arg, tok.pos)
        if name in ("t", "pi"):
            return Var(name, 0, tok.pos)
        m = _VARIABLE.match(name)
        if m is None:
            raise UnknownIdentifier(tok.pos, name)
        kind, index = m.group(1), int(m.group(2))
        limit = self.state_dim if kind == "x" else self.input_dim
        if not 1 <= index <= limit:
            raise ArityViolation(tok.pos, name, limit)
        return Var(kind, index, tok.pos)

    def parse(self):
        root = self.expression()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(tok.pos, f"unexpected {tok.text!r}")
        return root


# -------------------------------------------------------------------- printer

def _prec(node) -> int:
    if isinstance(node, BinOp):
        return {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}[node.op]
    if isinstance(node, Neg):
        return 3
    return 5


def _num_text(v: float) -> str:
    if math.isinf(v):
        return "1e999"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(node) -> str:
    """Render a syntax tree with the fewest parentheses that re-parse to it."""
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, Var):
        return node.kind if node.kind in ("t", "pi") else f"{node.kind}{node.index}"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        return f"-({inner})" if _prec(node.operand) < 3 else f"-{inner}"
    p = _prec(node)
    left, right = to_text(node.left), to_text(node.right)
    if node.op == "^":
        left_paren = _prec(node.left) <= p
        right_paren = _prec(node.right) < p
    else:
        left_paren = _prec(node.left) < p
        right_paren = _prec(node.right) <= p
    if left_paren:
        left = f"({left})"
    if right_paren:
        right = f"({right})"
    return f"{left}{node.op}{right}"


# ----------------------------------------------------------------- evaluation

Compiled = Callable[[Sequence[float], Sequence[float], float], float]


def _divide(a: float, b: float, pos: int) -> float:
    if b == 0:
        raise EvalError("DivByZero", pos)
    return a / b


def _power(a: float, b: float, pos: int) -> float:
    if a == 0 and b < 0:
        raise EvalError("DivByZero", pos)
    try:
        return math.pow(a, b)
    except ValueError:
        raise EvalError("PowDomain", pos) from None
    except OverflowError:
        raise EvalError("Overflow", pos) from None


def _log(a: float, pos: int) -> float:
    if a <= 0:
        raise EvalError("LogDomain", pos)
    return math.log(a)


def _sqrt(a: float, pos: int) -> float:
    if a < 0:
        raise EvalError("SqrtDomain", pos)
    return math.sqrt(a)


def _exp(a: float, pos: int) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        raise EvalError("Overflow", pos) from None


def _sign(a: float, pos: int) -> float:
    return float((a > 0) - (a < 0))


_UNARY_FUNCS = {
    "sin": lambda a, pos: math.sin(a),
    "cos": lambda a, pos: math.cos(a),
    "tan": lambda a, pos: math.tan(a),
    "abs": lambda a, pos: abs(a),
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "sign": _sign,
}


def _compile(node) -> Compiled:
    if isinstance(node, Num):
        v = node.value
        return lambda x, u, t: v
    if isinstance(node, Var):
        if node.kind == "t":
            return lambda x, u, t: t
        if node.kind == "pi":
            return lambda x, u, t: math.pi
        j = node.index - 1
        if node.kind == "x":
            return lambda x, u, t: x[j]
        return lambda x, u, t: u[j]
    if isinstance(node, Neg):
        f = _compile(node.operand)
        return lambda x, u, t: -f(x, u, t)
    if isinstance(node, Call):
        f, g, pos = _compile(node.arg), _UNARY_FUNCS[node.func], node.pos
        return lambda x, u, t: g(f(x, u, t), pos)
    a, b, pos = _compile(node.left), _compile(node.right), node.pos
    if node.op == "+":
        return lambda x, u, t: a(x, u, t) + b(x, u, t)
    if node.op == "-":
        return lambda x, u, t: a(x, u, t) - b(x, u, t)
    if node.op == "*":
        return lambda x, u, t: a(x, u, t) * b(x, u, t)
    if node.op == "/":
        return lambda x, u, t: _divide(a(x, u, t), b(x, u, t), pos)
    return lambda x, u, t: _power(a(x, u, t), b(x, u, t), pos)


class Expr:
    """A parsed scalar expression with declared state and input arity."""

    __slots__ = ("root", "state_dim", "input_dim", "_fn")

    def __init__(self, root, state_dim: int = 0, input_dim: int = 0):
        self.root = root
        self.state_dim = state_dim
        self.input_dim = input_dim
        self._fn = _compile(root)

    def evaluate(self, x=(), u=None, t: float = 0.0) -> float:
        """Evaluate at state ``x``, input ``u`` and time ``t``.

        Raises
        ------
        EvalError
            On a domain error or a non-finite result.
        DimensionMismatch
            If ``x`` or ``u`` is shorter than the declared arity.
        """
        xs = [float(v) for v in np.ravel(x)]
        us = [] if u is None else [float(v) for v in np.ravel(u)]
        if len(xs) < self.state_dim or len(us) < self.input_dim:
            raise DimensionMismatch(
                f"expression needs {self.state_dim} states and {self.input_dim} inputs")
        value = self._fn(xs, us, float(t))
        if not math.isfinite(value):
            raise EvalError("NonFinite", getattr(self.root, "pos", 0))
        return float(value)

    __call__ = evaluate

    def __str__(self):
        return to_text(self.root)

    def __repr__(self):
        return f"Expr({to_text(self.root)!r})"

    def __eq__(self, other):
        return isinstance(other, Expr) and self.root == other.root

    def __hash__(self):
        return hash(self.root)


def parse(text: str, state_dim: int = 0, input_dim: int = 0) -> Expr:
    """Parse ``text`` into an :class:`Expr`.

    Raises
    ------
    ExprSyntaxError
        Malformed input; carries the byte offset of the offending token.
    UnknownIdentifier
        A name that is not a variable, ``t``, ``pi`` or a known function.
    ArityViolation
        ``x_i`` with ``i > state_dim`` or ``u_j`` with ``j > input_dim``.
    """
    root = _Parser(str(text), state_dim, input_dim).parse()
    return Expr(root, state_dim, input_dim)


@dataclass(frozen=True)
class ExprVector:
    """Ordered list of expressions sharing one state and input arity."""

    components: tuple[Expr, ...]
    state_dim: int
    input_dim: int = 0

    def __post_init__(self):
        if not self.components:
            raise ValueError("an expression vector needs at least one component")

    def __len__(self):
        return len(self.components)

    def evaluate(self, x=(), u=None, t: float = 0.0) -> np.ndarray:
        return np.array([c.evaluate(x, u, t) for c in self.components])

    __call__ = evaluate

    def texts(self) -> list[str]:
        return [str(c) for c in self.components]


def parse_vector_exprs(texts: Sequence[str], state_dim: int,
                       input_dim: int = 0) -> ExprVector:
    """Parse each string of ``texts`` with the same arity."""
    return ExprVector(tuple(parse(s, state_dim, input_dim) for s in texts),
                      state_dim, input_dim)
