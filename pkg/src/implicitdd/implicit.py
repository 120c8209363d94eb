"""Divided differences of an implicit function y from divided differences of g.

Notation: for multi-indices a <= b, ``[x: a, b]y`` is the divided difference
of y over the grid nodes with indices between a and b.  A divided difference
of g is described by a :class:`GBracket` ``[x-ranges | y-list]g``: per axis a
contiguous index range of x nodes, plus a list of grid multi-indices whose
y-values serve as the nodes in y.

Three evaluators are provided and agree to roundoff:

* :func:`r2prime` -- the recursion over increasing chains, lower orders
  computed by recursive calls;
* :func:`main_theorem_polygon` -- sum over unit paths and polygon partitions
  of products of curly brackets;
* :func:`main_theorem_tree` -- the fully expanded sum over typed plane trees,
  one product of quotients per tree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .ddcore import GProvider, Grid, g_tensor_dd, working_precision
from .errors import DimensionError, InconsistentPointError, SingularConfigurationError
from .mindex import (
    LatticePath,
    MultiIndex,
    compatible_tuples,
    enumerate_increasing_paths,
    enumerate_unit_paths,
    format_mindex,
    partial_leq,
    unit,
    unit_axis,
    zero,
)
from .polytree import enumerate_partitions, enumerate_tprime, star_type, stars

__all__ = [
    "RESIDUAL_TOL",
    "DENOMINATOR_RTOL",
    "GBracket",
    "Quotient",
    "TermExpr",
    "CurlyProduct",
    "ImplicitProblem",
    "r1",
    "curly_bracket",
    "curly_terms",
    "r2prime",
    "main_theorem_polygon",
    "main_theorem_tree",
    "emit_terms",
    "emit_curly_terms",
]

RESIDUAL_TOL = 1e-10
DENOMINATOR_RTOL = 1e-12


def _mi(a) -> MultiIndex:
    return a if isinstance(a, MultiIndex) else MultiIndex(a)


@dataclass(frozen=True)
class GBracket:
    """``[x_lo..x_hi (per axis) | y_{i_0} ... y_{i_t}]g``."""

    x_lo: MultiIndex
    x_hi: MultiIndex
    y: tuple[MultiIndex, ...]

    def format(self, style: str = "basis") -> str:
        axes = ";".join(" ".join(str(i) for i in range(a, b + 1)) for a, b in zip(self.x_lo, self.x_hi))
        ys = " ".join(format_mindex(p, style) for p in self.y)
        return f"[{axes}|{ys}]g"


@dataclass(frozen=True)
class Quotient:
    """The factor ``-(num / den)``."""

    num: GBracket
    den: GBracket

    def format(self, style: str = "basis") -> str:
        return f"{self.num.format(style)}/{self.den.format(style)}"


@dataclass(frozen=True)
class TermExpr:
    """A product of negated quotients of g-divided differences."""

    factors: tuple[Quotient, ...]

    @property
    def sign(self) -> int:
        return -1 if len(self.factors) % 2 else 1

    def format(self, style: str = "basis") -> str:
        body = " * ".join(f.format(style) for f in self.factors)
        return ("-" if self.sign < 0 else "+") + body

    def value(self, problem: ImplicitProblem) -> float:
        return math.prod(problem.quotient(f) for f in self.factors)


@dataclass(frozen=True)
class CurlyProduct:
    """A product of curly brackets, one per face of a polygon partition."""

    faces: tuple[tuple[MultiIndex, ...], ...]

    def format(self, style: str = "basis") -> str:
        return " * ".join("{" + " ".join(format_mindex(p, style) for p in f) + "}g" for f in self.faces)


class ImplicitProblem:
    """g, a grid, and the values y_i = y(x_i) at every grid point.

    ``y_values`` is an array shaped like the grid, or a mapping from grid
    multi-index to value.  Every (x_i, y_i) must satisfy |g| < 1e-10.

    An object array of mpmath numbers, paired with a provider sampling in
    mpmath, keeps every divided difference of g in extended precision; only
    the finished divided differences are rounded to floats.
    """

    def __init__(self, provider: GProvider, grid: Grid, y_values, residual_tol: float = RESIDUAL_TOL):
        if provider.q != grid.q:
            raise DimensionError(f"g has q={provider.q}, grid has q={grid.q}")
        self.provider = provider
        self.grid = grid
        if isinstance(y_values, Mapping):
            arr = np.full(grid.shape, np.nan)
            for idx, v in y_values.items():
                arr[tuple(idx)] = v
            y_values = arr
        y = np.array(y_values)
        if y.dtype != object:
            y = y.astype(float)
        if y.shape != grid.shape:
            raise DimensionError(f"y values have shape {y.shape}, grid has shape {grid.shape}")
        if not np.all(np.isfinite(y.astype(float))):
            raise ValueError("y values missing or non-finite at some grid points")
        y.setflags(write=False)
        self.y_values = y
        self._samples: dict = {}
        self._gdd: dict = {}
        self._curly: dict = {}
        self._ydd: dict = {}
        for idx in grid.indices():
            res = self.sample(idx, idx)
            if not abs(res) < residual_tol:
                raise InconsistentPointError(
                    f"|g(x, y)| = {float(abs(res)):.3g} at grid index {tuple(idx)} exceeds {residual_tol:g}"
                )

    @property
    def q(self) -> int:
        return self.grid.q

    @property
    def n(self) -> MultiIndex:
        return self.grid.order

    def x(self, idx) -> tuple[float, ...]:
        return self.grid.point(idx)

    def y(self, idx) -> float:
        return float(self.y_values[tuple(idx)])

    def sample(self, x_idx, y_idx) -> float:
        """g(x at grid index ``x_idx``, y at grid index ``y_idx``)."""
        key = (tuple(x_idx), tuple(y_idx))
        v = self._samples.get(key)
        if v is None:
            v = self.provider.sample(self.x(x_idx), self.y_values[tuple(y_idx)])
            self._samples[key] = v
        return v

    def gdd(self, bracket: GBracket) -> float:
        v = self._gdd.get(bracket)
        if v is not None:
            return v
        lo, hi, ys = bracket.x_lo, bracket.x_hi, bracket.y
        ranges = [range(a, b + 1) for a, b in zip(lo, hi)]
        exact = getattr(self.provider, "dps", None) is not None
        values = np.empty(tuple(len(r) for r in ranges) + (len(ys),), dtype=object if exact else float)
        for pos in np.ndindex(values.shape[:-1]):
            x_idx = tuple(r[i] for r, i in zip(ranges, pos))
            for j, yi in enumerate(ys):
                values[pos + (j,)] = self.sample(x_idx, yi)
        x_nodes = [self.grid.nodes[r][a: b + 1] for r, (a, b) in enumerate(zip(lo, hi))]
        with working_precision(self.provider):
            v = g_tensor_dd(values, x_nodes, [self.y_values[tuple(i)] for i in ys])
        self._gdd[bracket] = v
        return v

    def quotient(self, f: Quotient) -> float:
        """Value of ``-(num/den)``, refusing near-zero denominators."""
        num, den = self.gdd(f.num), self.gdd(f.den)
        scale = max(abs(num), abs(den), 1.0)
        if not abs(den) >= DENOMINATOR_RTOL * scale:
            raise SingularConfigurationError(
                f"denominator {f.den.format()} = {den!r} vanishes (numerator {f.num.format()} = {num!r})"
            )
        return -num / den

    def check_box(self, base, n) -> None:
        top = base + n
        if base.q != self.q or n.q != self.q:
            raise DimensionError("multi-index dimension does not match the problem")
        if not partial_leq(top, self.n):
            raise ValueError(f"box {tuple(base)}..{tuple(top)} exceeds the grid (order {tuple(self.n)})")


# --------------------------------------------------------------------------
# symbolic building blocks


def star_quotient(points: Sequence[MultiIndex], s: MultiIndex, t: int) -> Quotient:
    """Quotient attached to a star with root label ``points`` and type (s, t)."""
    i0, ik = points[0], points[-1]
    m = s.order
    num = GBracket(i0, i0 + s, tuple(points[m: m + t + 1]))
    den = GBracket(i0, i0, (i0, ik))
    return Quotient(num, den)


def r1_quotient(base: MultiIndex, r: int) -> Quotient:
    e = unit(base.q, r)
    return star_quotient((base, base + e), e, 0)


def curly_terms(path) -> tuple[TermExpr, ...]:
    """The expansion of the curly bracket of a chain, one term per compatible
    (s, t) in order of decreasing t.

    Each term is the main quotient followed by one first-order quotient for
    every unit step among the final t steps.  A single unit step yields the
    first-order formula itself.
    """
    pts = path.points if isinstance(path, LatticePath) else tuple(_mi(p) for p in path)
    return _curly_terms(pts)


@lru_cache(maxsize=None)
def _curly_terms(pts: tuple[MultiIndex, ...]) -> tuple[TermExpr, ...]:
    path = LatticePath(pts)
    if path.k == 1:
        r = unit_axis(path.steps[0])
        if r is None:
            raise ValueError("a one-step curly bracket needs a unit step")
        return (TermExpr((r1_quotient(pts[0], r),)),)
    terms = []
    for ct in compatible_tuples(path):
        m = ct.s.order
        factors = [star_quotient(pts, ct.s, ct.t)]
        for j in range(m + 1, m + ct.t + 1):
            r = unit_axis(pts[j] - pts[j - 1])
            if r is not None:
                factors.append(r1_quotient(pts[j - 1], r))
        terms.append(TermExpr(tuple(factors)))
    return tuple(terms)


# --------------------------------------------------------------------------
# evaluators


def _base_and_n(problem: ImplicitProblem, n, base):
    n = _mi(n)
    base = zero(n.q) if base is None else _mi(base)
    problem.check_box(base, n)
    return n, base


def _sum(values) -> float:
    return math.fsum(values)


def r1(problem: ImplicitProblem, base, r: int) -> float:
    """First-order divided difference [x: base, base + e_r]y."""
    base = _mi(base)
    problem.check_box(base, unit(problem.q, r))
    return problem.quotient(r1_quotient(base, r))


def curly_bracket(problem: ImplicitProblem, path) -> float:
    """Value of the curly bracket of a chain of grid multi-indices."""
    pts = path.points if isinstance(path, LatticePath) else tuple(_mi(p) for p in path)
    v = problem._curly.get(pts)
    if v is None:
        problem.check_box(pts[0], pts[-1] - pts[0])
        v = _sum(t.value(problem) for t in _curly_terms(pts))
        problem._curly[pts] = v
    return v


def r2prime(problem: ImplicitProblem, n, base=None) -> float:
    """[x: base, base + n]y by the recursion over increasing chains.

    Lower-order divided differences of y along non-unit steps are obtained by
    recursive calls at translated bases; order one uses the first-order formula.
    """
    n, base = _base_and_n(problem, n, base)
    return _r2prime(problem, n, base)


def _r2prime(problem, n, base):
    key = (base, n)
    if key in problem._ydd:
        return problem._ydd[key]
    if n.order == 0:
        raise ValueError("|n| >= 1 required")
    if n.order == 1:
        v = r1(problem, base, unit_axis(n))
    else:
        terms = []
        for k in range(2, n.order + 1):
            for path in enumerate_increasing_paths(base, base + n, k):
                pts = path.points
                prod = curly_bracket(problem, pts)
                for a, b in zip(pts, pts[1:]):
                    if (b - a).order >= 2:
                        prod *= _r2prime(problem, b - a, a)
                terms.append(prod)
        v = _sum(terms)
    problem._ydd[key] = v
    return v


def main_theorem_polygon(problem: ImplicitProblem, n, base=None) -> float:
    """Sum over unit paths and polygon partitions of products of curly brackets."""
    n, base = _base_and_n(problem, n, base)
    if n.order < 2:
        raise ValueError("|n| >= 2 required")
    terms = []
    for path in enumerate_unit_paths(base, base + n):
        for part in enumerate_partitions(path.points):
            terms.append(math.prod(curly_bracket(problem, f) for f in part.face_points()))
    return _sum(terms)


def main_theorem_tree(problem: ImplicitProblem, n, base=None) -> float:
    """Sum over unit paths and typed plane trees of products of star quotients."""
    n, base = _base_and_n(problem, n, base)
    if n.order < 2:
        raise ValueError("|n| >= 2 required")
    return _sum(t.value(problem) for t in emit_terms(n, "tree", base))


# --------------------------------------------------------------------------
# symbolic output


def emit_terms(n, mode: str = "tree", base=None) -> tuple[TermExpr, ...]:
    """Fully expanded term list for [x: base, base + n]y.

    ``mode="polygon"`` expands each product of curly brackets (unit paths,
    then partitions, then the compatible tuples of each face in preorder);
    ``mode="tree"`` emits one term per typed plane tree, factors in star
    preorder.  Both list the same multiset of terms.  |n| = 1 gives the
    single first-order quotient.
    """
    n = _mi(n)
    base = zero(n.q) if base is None else _mi(base)
    if mode not in ("polygon", "tree"):
        raise ValueError(f"unknown mode {mode!r}")
    return _emit_terms(n, mode, base)


@lru_cache(maxsize=None)
def _emit_terms(n: MultiIndex, mode: str, base: MultiIndex) -> tuple[TermExpr, ...]:
    if n.order == 0:
        raise ValueError("|n| >= 1 required")
    if n.order == 1:
        return (TermExpr((r1_quotient(base, unit_axis(n)),)),)
    out = []
    for path in enumerate_unit_paths(base, base + n):
        if mode == "polygon":
            for part in enumerate_partitions(path.points):
                expansions = [_curly_terms(f) for f in part.face_points()]
                for combo in product(*expansions):
                    out.append(TermExpr(tuple(q for t in combo for q in t.factors)))
        else:
            for tree in enumerate_tprime(path.points):
                factors = []
                for st in stars(tree):
                    ty = star_type(st)
                    factors.append(star_quotient(st.label, ty.s, ty.t))
                out.append(TermExpr(tuple(factors)))
    return tuple(out)


def emit_curly_terms(n, base=None) -> tuple[CurlyProduct, ...]:
    """Products of curly brackets, one per (unit path, partition), in order."""
    n = _mi(n)
    base = zero(n.q) if base is None else _mi(base)
    if n.order < 2:
        raise ValueError("|n| >= 2 required")
    return tuple(
        CurlyProduct(tuple(part.face_points()))
        for path in enumerate_unit_paths(base, base + n)
        for part in enumerate_partitions(path.points)
    )
