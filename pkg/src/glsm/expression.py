"""Infix expressions over chart variables ``u1..u9`` and ambient variables ``x1..x9``.

Grammar (``^`` binds tighter than unary minus, exponents are integer literals)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | '+' unary | power
    power  := atom ('^' ['-'] INT)?
    atom   := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Names are ``u1..u9``, ``x1..x9`` and the constants ``pi``, ``e``, ``phi``.
Evaluation accepts floats or :class:`Dual` numbers; the latter carry a
gradient array and give forward-mode derivatives.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError

FUNCS = ("sqrt", "sin", "cos", "exp")
CONSTS = {"pi": math.pi, "e": math.e, "phi": (1 + math.sqrt(5)) / 2}
_VAR = re.compile(r"[ux][1-9]\Z")
_TOKEN = re.compile(r"\s*(?:(\d+\.\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?|\d+(?:[eE][-+]?\d+)?)|([A-Za-z_]\w*)|(.))")


class Dual:
    """Value plus gradient with respect to a fixed set of seed variables."""

    __slots__ = ("val", "grad")

    def __init__(self, val: float, grad):
        self.val = float(val)
        self.grad = np.asarray(grad, dtype=float)

    def _lift(self, other):
        if isinstance(other, Dual):
            return other
        return Dual(other, np.zeros_like(self.grad))

    def __add__(self, o):
        o = self._lift(o)
        return Dual(self.val + o.val, self.grad + o.grad)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._lift(o)
        return Dual(self.val - o.val, self.grad - o.grad)

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        return Dual(self.val * o.val, self.grad * o.val + o.grad * self.val)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        return Dual(self.val / o.val, (self.grad * o.val - o.grad * self.val) / (o.val * o.val))

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def __neg__(self):
        return Dual(-self.val, -self.grad)

    def __pow__(self, k: int):
        if k == 0:
            return Dual(1.0, np.zeros_like(self.grad))
        return Dual(self.val**k, k * self.val ** (k - 1) * self.grad)


def _value(x) -> float:
    return x.val if isinstance(x, Dual) else float(x)


def _apply(fn: str, x):
    v = _value(x)
    if fn == "sqrt":
        if v < 0:
            raise DomainError(f"sqrt of negative value {v:g}")
        out = math.sqrt(v)
        if isinstance(x, Dual):
            if out == 0.0:
                raise DomainError("derivative of sqrt at 0")
            return Dual(out, x.grad / (2 * out))
        return out
    f, df = {
        "sin": (math.sin, math.cos),
        "cos": (math.cos, lambda t: -math.sin(t)),
        "exp": (math.exp, math.exp),
    }[fn]
    if isinstance(x, Dual):
        return Dual(f(v), df(v) * x.grad)
    return f(v)


@dataclass(frozen=True)
class Num:
    value: float

    def eval(self, env):
        return self.value


@dataclass(frozen=True)
class Var:
    name: str

    def eval(self, env):
        try:
            return env[self.name]
        except KeyError:
            raise DomainError(f"variable {self.name} is not bound") from None


@dataclass(frozen=True)
class Neg:
    arg: object

    def eval(self, env):
        return -self.arg.eval(env)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object

    def eval(self, env):
        a, b = self.left.eval(env), self.right.eval(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if _value(b) == 0.0:
            raise DomainError("division by zero")
        return a / b


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int

    def eval(self, env):
        b = self.base.eval(env)
        if self.exponent < 0:
            if _value(b) == 0.0:
                raise DomainError("negative power of zero")
            return 1.0 / (b ** (-self.exponent))
        return b**self.exponent


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object

    def eval(self, env):
        return _apply(self.fn, self.arg.eval(env))


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else m.end()
        if m.group(1) is not None:
            toks.append(("num", m.group(1), start))
        elif m.group(2) is not None:
            toks.append(("name", m.group(2), start))
        elif m.group(3) is not None:
            toks.append(("op", m.group(3), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, allowed: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.allowed = allowed

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        t = self.take()
        if t[1] != value:
            found = "end of input" if t[0] == "end" else repr(t[1])
            raise ParseError(f"expected '{value}', found {found}", t[2])
        return t

    def parse(self):
        node = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected {t[1]!r}", t[2])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            self.take()
            return Neg(self.unary())
        if t[0] == "op" and t[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            t = self.take()
            if t[0] != "num" or not t[1].isdigit():
                raise ParseError("exponent must be an integer literal", t[2])
            return Pow(base, sign * int(t[1]))
        return base

    def atom(self):
        t = self.take()
        kind, text, pos = t
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in CONSTS:
                return Num(CONSTS[text])
            if _VAR.match(text) and text[0] in self.allowed:
                return Var(text)
            raise ParseError(f"unknown name {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {text!r}", pos)


class Expression:
    """Parsed infix expression; immutable and safe to evaluate concurrently."""

    __slots__ = ("text", "root", "variables")

    def __init__(self, text: str, allowed: str = "ux"):
        self.text = str(text)
        self.root = _Parser(self.text, allowed).parse()
        self.variables = frozenset(_names(self.root))

    def __call__(self, env: dict):
        return self.root.eval(env)

    def eval_at(self, point, prefix: str = "u") -> float:
        env = {f"{prefix}{i + 1}": float(v) for i, v in enumerate(point)}
        return float(_value(self.root.eval(env)))

    def eval_grad(self, point, prefix: str = "u") -> tuple[float, np.ndarray]:
        n = len(point)
        eye = np.eye(n)
        env = {f"{prefix}{i + 1}": Dual(v, eye[i]) for i, v in enumerate(point)}
        out = self.root.eval(env)
        if isinstance(out, Dual):
            return out.val, out.grad
        return float(out), np.zeros(n)

    def __repr__(self):
        return f"Expression({self.text!r})"


def _names(node):
    if isinstance(node, Var):
        yield node.name
    for attr in ("arg", "left", "right", "base"):
        child = getattr(node, attr, None)
        if child is not None:
            yield from _names(child)


def parse_expression(text: str, allowed: str = "ux") -> Expression:
    return Expression(text, allowed)
