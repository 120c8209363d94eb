"""Closed-form expressions in x1..xq and y: parsing, printing, symbolic
differentiation and evaluation.

Grammar, loosest binding first::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' exponent)*
    exponent := ['-'] INTEGER | '(' ['-'] INTEGER ')'
    atom   := NUMBER | 'x'INDEX | 'y' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := sin | cos | exp | log | sqrt

Binary operators associate to the left.  Exponents are integers only, which
keeps differentiation closed-form and evaluation total on its domain.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import mpmath

from .errors import DomainError, ExprError

__all__ = [
    "Expr",
    "Const",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Func",
    "parse",
    "to_source",
    "diff",
    "diff_multi",
    "evaluate",
    "compile_expr",
    "variables",
]

FUNCS = ("sin", "cos", "exp", "log", "sqrt")


class Expr:
    """Base class of expression nodes.  Nodes are immutable and hashable."""

    prec = 5

    def __str__(self):
        return to_source(self)

    # convenience operators for building expressions in code
    def __add__(self, other):
        return Add(self, _wrap(other))

    def __radd__(self, other):
        return Add(_wrap(other), self)

    def __sub__(self, other):
        return Sub(self, _wrap(other))

    def __rsub__(self, other):
        return Sub(_wrap(other), self)

    def __mul__(self, other):
        return Mul(self, _wrap(other))

    def __rmul__(self, other):
        return Mul(_wrap(other), self)

    def __truediv__(self, other):
        return Div(self, _wrap(other))

    def __neg__(self):
        return Neg(self)

    def __pow__(self, k):
        return Pow(self, int(k))


def _wrap(v):
    return v if isinstance(v, Expr) else Const(float(v))


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float
    prec = 5


@dataclass(frozen=True, eq=True)
class Var(Expr):
    """``index`` 0 is y; 1..q are x1..xq."""

    index: int
    prec = 5

    @property
    def name(self) -> str:
        return "y" if self.index == 0 else f"x{self.index}"


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    arg: Expr
    prec = 3


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr
    prec = 1
    op = "+"


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr
    prec = 1
    op = "-"


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr
    prec = 2
    op = "*"


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr
    prec = 2
    op = "/"


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: int
    prec = 4


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    arg: Expr
    prec = 5


# --------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            break
        m = _TOKEN_RE.match(src, pos)
        if not m or m.end() == pos:
            raise ExprError(f"unexpected character {src[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, q: int):
        self.tokens = _tokenize(src)
        self.i = 0
        self.q = q

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self, value=None):
        kind, text, pos = self.tok
        if value is not None and text != value:
            shown = text or "end of input"
            raise ExprError(f"expected {value!r}, found {shown!r}", pos)
        self.i += 1
        return kind, text, pos

    def expr(self):
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.take()[1]
            rhs = self.unary()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.take()
            arg = self.unary()
            # a negated literal is stored as a negative constant
            if isinstance(arg, Const):
                return Const(-arg.value)
            return Neg(arg)
        return self.power()

    def exponent(self) -> int:
        paren = self.tok[1] == "("
        if paren:
            self.take("(")
        sign = 1
        if self.tok[1] == "-":
            self.take()
            sign = -1
        kind, text, pos = self.take()
        if kind != "num" or not text.isdigit():
            raise ExprError("exponent must be an integer literal", pos)
        if paren:
            self.take(")")
        return sign * int(text)

    def power(self):
        node = self.atom()
        while self.tok[1] == "^":
            self.take()
            node = Pow(node, self.exponent())
        return node

    def atom(self):
        kind, text, pos = self.tok
        if kind == "num":
            self.take()
            return Const(float(text))
        if kind == "id":
            self.take()
            if text in FUNCS:
                self.take("(")
                arg = self.expr()
                self.take(")")
                return Func(text, arg)
            if text == "y":
                return Var(0)
            m = re.fullmatch(r"x([1-9]\d*)", text)
            if m:
                idx = int(m.group(1))
                if idx > self.q:
                    raise ExprError(f"variable {text} out of range for q={self.q}", pos)
                return Var(idx)
            raise ExprError(f"unknown identifier {text!r}", pos)
        if text == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        shown = text or "end of input"
        raise ExprError(f"unexpected {shown!r}", pos)


def parse(source: str, q: int) -> Expr:
    """Parse ``source`` into an expression over x1..xq and y."""
    if q < 1:
        raise ValueError("q must be >= 1")
    p = _Parser(source, q)
    node = p.expr()
    kind, text, pos = p.tok
    if kind != "end":
        raise ExprError(f"unexpected {text!r}", pos)
    return node


# --------------------------------------------------------------------------
# printing


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_source(e: Expr) -> str:
    """Print with minimal parentheses; ``parse(to_source(e), q) == e``."""
    if isinstance(e, Const):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.arg)
        if e.arg.prec < Pow.prec or _negative_const(e.arg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = to_source(e.base)
        if e.base.prec <= Pow.prec - 1 or _negative_const(e.base) or isinstance(e.base, Pow):
            base = f"({base})"
        return f"{base}^{e.exponent}"
    left, right = to_source(e.left), to_source(e.right)
    if e.left.prec < e.prec:
        left = f"({left})"
    if e.right.prec <= e.prec or _negative_const(e.right):
        right = f"({right})"
    return f"{left} {e.op} {right}"


def _negative_const(e: Expr) -> bool:
    return isinstance(e, Const) and (e.value < 0 or math.copysign(1.0, e.value) < 0)


# --------------------------------------------------------------------------
# simplifying constructors (constant folding and 0/1 identities only)


def _is(e, v):
    return isinstance(e, Const) and e.value == v


def s_add(a, b):
    if _is(a, 0):
        return b
    if _is(b, 0):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return Add(a, b)


def s_sub(a, b):
    if _is(b, 0):
        return a
    if _is(a, 0):
        return s_neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return Sub(a, b)


def s_neg(a):
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def s_mul(a, b):
    if _is(a, 0) or _is(b, 0):
        return Const(0.0)
    if _is(a, 1):
        return b
    if _is(b, 1):
        return a
    if _is(a, -1):
        return s_neg(b)
    if _is(b, -1):
        return s_neg(a)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if isinstance(b, Const):
        a, b = b, a
    if isinstance(a, Const) and isinstance(b, Mul) and isinstance(b.left, Const):
        return s_mul(Const(a.value * b.left.value), b.right)
    return Mul(a, b)


def s_div(a, b):
    if _is(b, 1):
        return a
    if _is(a, 0) and not _is(b, 0):
        return Const(0.0)
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    return Div(a, b)


def s_pow(a, k: int):
    if k == 0:
        return Const(1.0)
    if k == 1:
        return a
    if isinstance(a, Const) and (a.value != 0 or k > 0):
        return Const(a.value ** k)
    return Pow(a, k)


# --------------------------------------------------------------------------
# differentiation


@lru_cache(maxsize=None)
def diff(e: Expr, var: int | str) -> Expr:
    """Exact partial derivative of ``e`` with respect to a variable.

    ``var`` is a :class:`Var` index (0 for y) or a name such as ``"x2"``.
    """
    if isinstance(var, str):
        var = 0 if var == "y" else int(var[1:])
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0 if e.index == var else 0.0)
    if isinstance(e, Neg):
        return s_neg(diff(e.arg, var))
    if isinstance(e, Add):
        return s_add(diff(e.left, var), diff(e.right, var))
    if isinstance(e, Sub):
        return s_sub(diff(e.left, var), diff(e.right, var))
    if isinstance(e, Mul):
        return s_add(s_mul(diff(e.left, var), e.right), s_mul(e.left, diff(e.right, var)))
    if isinstance(e, Div):
        du, dv = diff(e.left, var), diff(e.right, var)
        if _is(dv, 0):
            return s_div(du, e.right)
        return s_div(s_sub(s_mul(du, e.right), s_mul(e.left, dv)), s_pow(e.right, 2))
    if isinstance(e, Pow):
        du = diff(e.base, var)
        return s_mul(s_mul(Const(float(e.exponent)), s_pow(e.base, e.exponent - 1)), du)
    if isinstance(e, Func):
        du = diff(e.arg, var)
        if _is(du, 0):
            return Const(0.0)
        u = e.arg
        outer = {
            "sin": lambda: Func("cos", u),
            "cos": lambda: s_neg(Func("sin", u)),
            "exp": lambda: e,
            "log": lambda: s_div(Const(1.0), u),
            "sqrt": lambda: s_div(Const(1.0), s_mul(Const(2.0), e)),
        }[e.name]()
        return s_mul(outer, du)
    raise TypeError(f"not an expression: {e!r}")


def diff_multi(e: Expr, orders: Sequence[int]) -> Expr:
    """Mixed partial: ``orders[0]`` times in y, ``orders[j]`` times in xj."""
    for var, count in enumerate(orders):
        for _ in range(count):
            e = diff(e, var)
    return e


def variables(e: Expr) -> set[int]:
    if isinstance(e, Var):
        return {e.index}
    out = set()
    for child in _children(e):
        out |= variables(child)
    return out


def _children(e):
    if isinstance(e, (Neg, Func)):
        return (e.arg,)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.left, e.right)
    return ()


# --------------------------------------------------------------------------
# evaluation


_BACKENDS = {"float": math, "mpmath": mpmath}


@lru_cache(maxsize=4096)
def compile_expr(e: Expr, backend: str = "float") -> Callable[..., float]:
    """Compile to a Python function ``f(y, x1, ..., xq)``.

    The body is straight-line code with one temporary per distinct subtree,
    so deep or repetitive derivative trees stay cheap.  With
    ``backend="mpmath"`` the function expects and returns mpmath numbers and
    computes at the current mpmath working precision.
    """
    if backend not in _BACKENDS:
        raise ValueError(f"unknown backend {backend!r}")
    lines: list[str] = []
    names: dict[Expr, str] = {}

    def emit(node):
        if node in names:
            return names[node]
        if isinstance(node, Const):
            return repr(float(node.value))
        if isinstance(node, Var):
            return "v[%d]" % node.index
        if isinstance(node, Neg):
            code = f"-{emit(node.arg)}"
        elif isinstance(node, (Add, Sub, Mul, Div)):
            code = f"{emit(node.left)} {node.op} {emit(node.right)}"
        elif isinstance(node, Pow):
            code = f"{emit(node.base)} ** {node.exponent}"
        elif isinstance(node, Func):
            code = f"_m.{node.name}({emit(node.arg)})"
        else:
            raise TypeError(f"not an expression: {node!r}")
        name = f"t{len(names)}"
        lines.append(f"    {name} = {code}")
        names[node] = name
        return name

    result = emit(e)
    wrap = "float" if backend == "float" else ""
    src = "def _f(*v):\n" + "\n".join(lines) + f"\n    return {wrap}({result})\n"
    namespace = {"_m": _BACKENDS[backend]}
    exec(compile(src, "<expr>", "exec"), namespace)
    return namespace["_f"]


def evaluate(e: Expr, point: Sequence[float], backend: str = "float") -> float:
    """Evaluate at ``point = (x1, ..., xq, y)``.

    Raises :class:`DomainError` for division by zero, log/sqrt outside their
    domain, or overflow, instead of returning inf/nan.
    """
    *xs, y = point
    f = compile_expr(e, backend)
    conv = float if backend == "float" else mpmath.mpf
    try:
        value = f(conv(y), *map(conv, xs))
    except ZeroDivisionError as exc:
        raise DomainError(f"division by zero evaluating {to_source(e)} at {tuple(point)}") from exc
    except (ValueError, OverflowError) as exc:
        raise DomainError(f"{exc} evaluating {to_source(e)} at {tuple(point)}") from exc
    except IndexError as exc:
        raise DomainError(f"point {tuple(point)} has too few coordinates for {to_source(e)}") from exc
    if backend == "mpmath" and isinstance(value, mpmath.mpc):
        raise DomainError(f"complex value evaluating {to_source(e)} at {tuple(point)}")
    if not (math.isfinite(value) if backend == "float" else mpmath.isfinite(value)):
        raise DomainError(f"non-finite value evaluating {to_source(e)} at {tuple(point)}")
    return value
