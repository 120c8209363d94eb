"""Higher partial derivatives of an implicit function from partials of g.

Let g(x, y(x)) = 0 with g_{0,1} != 0 at the point.  Writing g_{s,t} for the
partial of g of order s in x and t in y,

    y_n = n! * sum_p c(p) * prod_{(s,t) in p} ( -g_{s,t} / (s! t! g_{0,1}) ),

where p runs over multisets of pairs (s, t) with (0, 1) not in p,
sum s = n and sum t = |p| - 1, and c(p) = (1/|p|) * |p|! / prod mu!, the mu
being the multiplicities of the distinct elements of p.

The same sum arises by merging all grid nodes in the tree expansion of the
divided difference of y; :func:`coalesced_tree_form` evaluates it that way
and counts how often each multiset occurs.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .ddcore import GProvider
from .errors import DimensionError, InconsistentPointError, SingularConfigurationError
from .mindex import MultiIndex, enumerate_unit_paths, zero
from .polytree import enumerate_tprime, star_type, stars

__all__ = [
    "POINT_RESIDUAL_TOL",
    "DerivPartition",
    "enumerate_deriv_partitions",
    "partition_coefficient",
    "derivative_corollary",
    "coalesced_tree_form",
    "symbolic_terms",
    "symbolic_formula",
    "format_partial",
    "coalesced_terms",
    "format_term",
]

POINT_RESIDUAL_TOL = 1e-8
G01_ATOL = 1e-14

Pair = tuple[MultiIndex, int]


def _pair_key(e: Pair) -> tuple[int, ...]:
    return tuple(e[0]) + (e[1],)


def _order_key(e: Pair) -> tuple:
    """Canonical element order: by t, then s lexicographically."""
    return (e[1], tuple(e[0]))


@dataclass(frozen=True)
class DerivPartition:
    """A multiset of (s, t) pairs, stored sorted by (t, s)."""

    elements: tuple[Pair, ...]

    @classmethod
    def of(cls, *pairs) -> DerivPartition:
        els = []
        for p in pairs:
            p = tuple(p)
            if len(p) == 2 and not isinstance(p[0], int):
                els.append((MultiIndex(p[0]), int(p[1])))
            else:
                els.append((MultiIndex(p[:-1]), int(p[-1])))
        return cls(tuple(sorted(els, key=_order_key)))

    def __len__(self):
        return len(self.elements)

    def as_tuples(self) -> tuple[tuple[int, ...], ...]:
        return tuple(_pair_key(e) for e in self.elements)

    def multiplicities(self) -> Counter:
        return Counter(self.as_tuples())

    def __str__(self):
        return "{" + ", ".join("(" + ",".join(map(str, t)) + ")" for t in self.as_tuples()) + "}"


def _check_n(n) -> MultiIndex:
    n = n if isinstance(n, MultiIndex) else MultiIndex(n)
    if n.order < 1:
        raise ValueError("|n| >= 1 required")
    return n


def enumerate_deriv_partitions(n) -> list[DerivPartition]:
    """All admissible multisets for order n, ordered by size then elements.

    Elements are listed by (t, s); the search runs over nondecreasing element
    sequences and stops at size 2|n| - 1.
    """
    return list(_enumerate(_check_n(n)))


@lru_cache(maxsize=None)
def _enumerate(n: MultiIndex) -> tuple[DerivPartition, ...]:
    out = []
    s_choices = [MultiIndex(s) for s in _box(n)]
    for size in range(1, 2 * n.order):
        t_total = size - 1
        cands = [
            (s, t)
            for s in s_choices
            for t in range(t_total + 1)
            if (s.order, t) != (0, 0) and not (s.order == 0 and t == 1)
        ]
        cands.sort(key=_order_key)

        def rec(start, remaining, s_left, t_left, acc):
            if remaining == 0:
                if s_left.order == 0 and t_left == 0:
                    out.append(DerivPartition(tuple(acc)))
                return
            for j in range(start, len(cands)):
                s, t = cands[j]
                if t > t_left or any(a > b for a, b in zip(s, s_left)):
                    continue
                acc.append((s, t))
                rec(j, remaining - 1, s_left - s, t_left - t, acc)
                acc.pop()

        rec(0, size, n, t_total, [])
    out.sort(key=lambda p: (len(p), [_order_key(e) for e in p.elements]))
    return tuple(out)


def _box(n):
    if len(n) == 1:
        return [(i,) for i in range(n[0] + 1)]
    return [(i,) + rest for i in range(n[0] + 1) for rest in _box(n[1:])]


def partition_coefficient(p: DerivPartition) -> Fraction:
    """(1/|p|) * |p|! / prod of multiplicity factorials, exactly."""
    size = len(p)
    denom = math.prod(math.factorial(m) for m in p.multiplicities().values())
    return Fraction(math.factorial(size), size * denom)


def _point_checks(g: GProvider, x, y) -> float:
    if len(x) != g.q:
        raise DimensionError(f"x has {len(x)} coordinates, expected q={g.q}")
    res = g.sample(tuple(x), y)
    if not abs(res) < POINT_RESIDUAL_TOL:
        raise InconsistentPointError(f"|g(x, y)| = {abs(res):.3g} exceeds {POINT_RESIDUAL_TOL:g}")
    g01 = g.partial(zero(g.q), 1, tuple(x), y)
    if not abs(g01) > G01_ATOL:
        raise SingularConfigurationError(f"g_y = {g01!r} vanishes at the point")
    return g01


def derivative_corollary(g: GProvider, x: Sequence[float], y: float, n) -> float:
    """The partial derivative y_n at x, given g(x, y) = 0."""
    n = _check_n(n)
    if n.q != g.q:
        raise DimensionError(f"n has q={n.q}, g has q={g.q}")
    g01 = _point_checks(g, x, y)
    cache: dict = {}

    def factor(s, t):
        key = (s, t)
        if key not in cache:
            cache[key] = -g.partial(s, t, tuple(x), y) / (s.factorial() * math.factorial(t) * g01)
        return cache[key]

    terms = []
    for p in _enumerate(n):
        c = partition_coefficient(p)
        terms.append(float(c) * math.prod(factor(s, t) for s, t in p.elements))
    return n.factorial() * math.fsum(terms)


def coalesced_tree_form(g: GProvider, x: Sequence[float], y: float, n) -> tuple[float, Counter]:
    """y_n / n! from the tree expansion with every node merged.

    Each typed tree along each unit path from 0 to n contributes the product
    over its stars of -g_{s,t} / (s! t! g_{0,1}).  Returns the value and a
    Counter mapping each star-type multiset (as a :class:`DerivPartition`) to
    the number of (path, tree) pairs producing it.
    """
    n = _check_n(n)
    if n.q != g.q:
        raise DimensionError(f"n has q={n.q}, g has q={g.q}")
    g01 = _point_checks(g, x, y)
    census: Counter = Counter()
    cache: dict = {}

    def factor(s, t):
        key = (s, t)
        if key not in cache:
            cache[key] = -g.partial(s, t, tuple(x), y) / (s.factorial() * math.factorial(t) * g01)
        return cache[key]

    terms = []
    for path in enumerate_unit_paths(zero(n.q), n):
        for tree in enumerate_tprime(path.points):
            types = [star_type(st) for st in stars(tree)]
            census[DerivPartition.of(*((ty.s, ty.t) for ty in types))] += 1
            terms.append(math.prod(factor(ty.s, ty.t) for ty in types))
    return math.fsum(terms), census


# --------------------------------------------------------------------------
# symbolic output


def format_partial(s, t: int) -> str:
    """``g101`` for s=(1,0), t=1; ``g_(10,0,1)`` once any order exceeds 9."""
    orders = tuple(s) + (t,)
    if max(orders) >= 10:
        return "g_(" + ",".join(map(str, orders)) + ")"
    return "g" + "".join(map(str, orders))


def symbolic_terms(n) -> list[tuple[Fraction, DerivPartition]]:
    """Coefficient of prod g_{s,t} / g_{0,1}^{|p|} for each multiset p."""
    n = _check_n(n)
    out = []
    for p in _enumerate(n):
        c = Fraction(n.factorial()) * partition_coefficient(p) * (-1) ** len(p)
        c /= math.prod(s.factorial() * math.factorial(t) for s, t in p.elements)
        out.append((c, p))
    return out


def coalesced_terms(n) -> list[tuple[Fraction, tuple[Pair, ...]]]:
    """Symbolic terms of the coalesced tree form, one per (path, tree).

    Each term is ``coefficient * prod g_{s,t} / g_{0,1}^k`` with the factors
    in star preorder; summing them gives y_n / n!.
    """
    n = _check_n(n)
    out = []
    for path in enumerate_unit_paths(zero(n.q), n):
        for tree in enumerate_tprime(path.points):
            factors = tuple((ty.s, ty.t) for ty in (star_type(st) for st in stars(tree)))
            c = Fraction(1)
            for s, t in factors:
                c *= Fraction(-1, s.factorial() * math.factorial(t))
            out.append((c, factors))
    return out


def format_term(c: Fraction, factors: Sequence[Pair], sign_first: bool = True) -> str:
    """``-(1/2) g002 g100 g010/g001^3``: factors kept in the given order."""
    q = len(factors[0][0])
    den = format_partial(zero(q), 1)
    power = len(factors)
    body = " ".join(format_partial(s, t) for s, t in factors)
    text = f"{_fmt_coeff(c)}{body}/{den}" + (f"^{power}" if power > 1 else "")
    return ("-" if c < 0 else "+" if sign_first else "") + text


def _fmt_coeff(c: Fraction) -> str:
    a = abs(c)
    if a == 1:
        return ""
    return f"{a} " if a.denominator == 1 else f"({a}) "


def symbolic_formula(n) -> str:
    """The derivative as text, e.g. ``-g200/g001 + 2 g101 g100/g001^2 - ...``."""
    n = _check_n(n)
    den = format_partial(zero(n.q), 1)
    pieces = []
    for k, (c, p) in enumerate(symbolic_terms(n)):
        sign = "-" if c < 0 else "+"
        mult = p.multiplicities()
        factors = []
        for key in sorted(mult, key=lambda u: (u[-1], u[:-1])):
            f = format_partial(key[:-1], key[-1])
            factors.append(f if mult[key] == 1 else f"{f}^{mult[key]}")
        power = len(p)
        body = f"{_fmt_coeff(c)}{' '.join(factors)}/{den}" + (f"^{power}" if power > 1 else "")
        if k == 0:
            pieces.append(("-" if sign == "-" else "") + body)
        else:
            pieces.append(f" {sign} {body}")
    return "".join(pieces)
