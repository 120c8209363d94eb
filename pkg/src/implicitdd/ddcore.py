"""Tensor-grid divided differences.

The divided difference of order (n_1, ..., n_q) over a rectangular grid is
computed by reducing one axis at a time with the classical recursion

    [x_0, ..., x_m] f = ([x_1, ..., x_m] f - [x_0, ..., x_{m-1}] f) / (x_m - x_0),

the last axis first.  The result does not depend on the order in which axes
are reduced.  Divided differences of g(x1, ..., xq, y) treat y as one more
axis whose nodes are y-values; these need not be sorted, only distinct.
"""
from __future__ import annotations

import contextlib
import itertools
from dataclasses import dataclass
from typing import Protocol, Sequence

import mpmath
import numpy as np

from .errors import CoincidentNodesError, DimensionError
from .exprsym import Expr, diff_multi, evaluate, parse
from .mindex import MultiIndex

__all__ = [
    "COINCIDENT_RTOL",
    "Grid",
    "GProvider",
    "ExprGProvider",
    "check_distinct",
    "divided_difference",
    "g_divided_difference",
    "g_tensor_dd",
    "coalesced_dd_to_partial",
    "working_precision",
]

#: nodes closer than this fraction of the axis span count as coincident
COINCIDENT_RTOL = 1e-12


def check_distinct(nodes: Sequence[float], what: str = "nodes") -> None:
    """Raise :class:`CoincidentNodesError` naming the closest offending pair."""
    x = np.asarray(nodes, dtype=float)
    if x.size < 2:
        return
    order = np.argsort(x, kind="stable")
    xs = x[order]
    gaps = np.diff(xs)
    span = xs[-1] - xs[0]
    bad = np.flatnonzero(gaps <= COINCIDENT_RTOL * span)
    if bad.size:
        j = int(bad[0])
        pair = (float(xs[j]), float(xs[j + 1]))
        raise CoincidentNodesError(f"coincident {what}: {pair[0]!r} and {pair[1]!r}", pair=pair)


@dataclass(frozen=True)
class Grid:
    """Per-axis node lists x^j_0 < ... < x^j_{n_j}."""

    nodes: tuple[np.ndarray, ...]

    def __post_init__(self):
        axes = []
        for j, axis in enumerate(self.nodes):
            a = np.array(axis, dtype=float).reshape(-1)
            if a.size == 0:
                raise ValueError(f"axis {j + 1} has no nodes")
            if np.any(np.diff(a) <= 0):
                raise CoincidentNodesError(f"axis {j + 1} nodes are not strictly increasing: {a.tolist()}")
            check_distinct(a, f"nodes on axis {j + 1}")
            a.setflags(write=False)
            axes.append(a)
        if not axes:
            raise DimensionError("a grid needs q >= 1 axes")
        object.__setattr__(self, "nodes", tuple(axes))

    @property
    def q(self) -> int:
        return len(self.nodes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.nodes)

    @property
    def order(self) -> MultiIndex:
        """(n_1, ..., n_q): one less than the node count per axis."""
        return MultiIndex(s - 1 for s in self.shape)

    def point(self, index) -> tuple[float, ...]:
        return tuple(float(self.nodes[j][i]) for j, i in enumerate(index))

    def sub(self, lo, hi) -> Grid:
        """The sub-grid of nodes with indices between ``lo`` and ``hi``."""
        return Grid(tuple(a[i: k + 1] for a, i, k in zip(self.nodes, lo, hi)))

    def indices(self):
        return (MultiIndex(i) for i in itertools.product(*(range(s) for s in self.shape)))

    def sample(self, f) -> np.ndarray:
        """Tensor of f(point) over the grid."""
        out = np.empty(self.shape)
        for idx in itertools.product(*(range(s) for s in self.shape)):
            out[idx] = f(self.point(idx))
        return out

    def __eq__(self, other):
        return isinstance(other, Grid) and len(self.nodes) == len(other.nodes) and all(
            np.array_equal(a, b) for a, b in zip(self.nodes, other.nodes)
        )

    def __hash__(self):
        return hash(tuple(a.tobytes() for a in self.nodes))


def _reduce_axis(values: np.ndarray, x: np.ndarray, axis: int) -> np.ndarray:
    c = np.moveaxis(values, axis, 0)
    for level in range(1, len(x)):
        step = (x[level:] - x[:-level]).reshape((-1,) + (1,) * (c.ndim - 1))
        c = (c[1:] - c[:-1]) / step
    return c[0]


def divided_difference(values, grid: Grid, axis_order: Sequence[int] | None = None) -> float:
    """Multivariate divided difference of sampled values over ``grid``.

    ``axis_order`` lists the axes (0-based) in the order they are reduced;
    the default is last axis first.
    """
    values = np.asarray(values)
    if values.dtype != object:
        values = values.astype(float)
    if values.shape != grid.shape:
        raise DimensionError(f"values have shape {values.shape}, grid has shape {grid.shape}")
    return _dd_tensor(values, grid.nodes, axis_order)


def _dd_tensor(values, nodes, axis_order=None) -> float:
    q = len(nodes)
    order = list(range(q - 1, -1, -1)) if axis_order is None else list(axis_order)
    if sorted(order) != list(range(q)):
        raise ValueError(f"axis_order must be a permutation of 0..{q - 1}")
    # reducing an axis removes it; track where the remaining ones sit
    remaining = list(range(q))
    for ax in order:
        pos = remaining.index(ax)
        values = _reduce_axis(values, np.asarray(nodes[ax]), pos)
        remaining.pop(pos)
    return float(values)


class GProvider(Protocol):
    """Source of g samples and exact partials g_{s,t}."""

    q: int

    def sample(self, x: Sequence[float], y: float) -> float: ...

    def partial(self, s: Sequence[int], t: int, x: Sequence[float], y: float) -> float: ...


class ExprGProvider:
    """GProvider backed by a closed-form expression and symbolic derivatives.

    With ``dps`` set, :meth:`sample` returns mpmath numbers computed with that
    many decimal digits; consumers reduce them at the same precision (see
    :func:`working_precision`).
    """

    def __init__(self, expr: Expr | str, q: int, dps: int | None = None):
        self.q = q
        self.dps = dps
        self.expr = parse(expr, q) if isinstance(expr, str) else expr
        self._partials: dict[tuple[int, ...], Expr] = {}

    def partial_expr(self, s: Sequence[int], t: int) -> Expr:
        s = tuple(s)
        if len(s) != self.q:
            raise DimensionError(f"s has {len(s)} entries, expected q={self.q}")
        key = s + (t,)
        if key not in self._partials:
            self._partials[key] = diff_multi(self.expr, (t,) + s)
        return self._partials[key]

    def sample(self, x, y) -> float:
        if len(x) != self.q:
            raise DimensionError(f"x has {len(x)} coordinates, expected q={self.q}")
        if self.dps is None:
            return evaluate(self.expr, tuple(x) + (y,))
        with mpmath.workdps(self.dps):
            return evaluate(self.expr, tuple(x) + (y,), "mpmath")

    def partial(self, s, t, x, y) -> float:
        return evaluate(self.partial_expr(s, t), tuple(x) + (y,))

    def __repr__(self):
        return f"ExprGProvider({str(self.expr)!r}, q={self.q}, dps={self.dps!r})"


def working_precision(provider) -> contextlib.AbstractContextManager:
    """Context matching the provider's mpmath precision (no-op for floats)."""
    dps = getattr(provider, "dps", None)
    return contextlib.nullcontext() if dps is None else mpmath.workdps(dps)


def g_tensor_dd(values, x_nodes: Sequence[Sequence[float]], y_nodes: Sequence[float]) -> float:
    """Divided difference of pre-sampled g values, last axis being y.

    ``values[i_1, ..., i_q, j] = g(x^1_{i_1}, ..., x^q_{i_q}, y_j)``.
    Object arrays (e.g. of mpmath numbers) are reduced in their own
    arithmetic; the result is rounded to a float.
    """
    y = np.asarray(y_nodes, dtype=float)
    check_distinct(y, "y values")
    for j, axis in enumerate(x_nodes):
        check_distinct(axis, f"x nodes on axis {j + 1}")
    # divided differences are symmetric in their nodes
    perm = np.argsort(y, kind="stable")
    values = np.asarray(values)
    y_exact = np.asarray(y_nodes, dtype=object if values.dtype == object else float)
    return _dd_tensor(values[..., perm], [np.asarray(a, dtype=float) for a in x_nodes] + [y_exact[perm]])


def g_divided_difference(p: GProvider, x_nodes: Sequence[Sequence[float]], y_nodes: Sequence[float]) -> float:
    """[x^1 nodes; ...; x^q nodes | y nodes] g."""
    if len(x_nodes) != p.q:
        raise DimensionError(f"{len(x_nodes)} x axes given, expected q={p.q}")
    shape = tuple(len(a) for a in x_nodes) + (len(y_nodes),)
    exact = getattr(p, "dps", None) is not None
    values = np.empty(shape, dtype=object if exact else float)
    for idx in itertools.product(*(range(s) for s in shape)):
        x = tuple(float(x_nodes[j][i]) for j, i in enumerate(idx[:-1]))
        values[idx] = p.sample(x, y_nodes[idx[-1]])
    with working_precision(p):
        return g_tensor_dd(values, x_nodes, y_nodes)


def coalesced_dd_to_partial(s, t: int | None = None) -> int:
    """Normalisation between fully coalesced divided differences and partials.

    With all nodes merged, a divided difference of order (s, t) equals the
    partial derivative of that order divided by ``s! * t!`` (for y alone,
    order n: divided by ``n!``).  Returns that factor.
    """
    s = s if isinstance(s, MultiIndex) else MultiIndex(s)
    factor = s.factorial()
    if t is not None:
        if t < 0:
            raise ValueError("t must be nonnegative")
        factor *= MultiIndex((t,)).factorial()
    return factor
