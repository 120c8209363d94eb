"""Multi-indices, the componentwise order on N^q, and lattice paths.

A lattice path is a strictly increasing chain ``p0 < p1 < ... < pk`` of
multi-indices.  The *steps* of a path are the consecutive differences; a path
is a unit-step path when every step is a standard basis vector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import DimensionError

__all__ = [
    "MultiIndex",
    "LatticePath",
    "CompatibleTuple",
    "unit",
    "zero",
    "partial_leq",
    "partial_lt",
    "multinomial",
    "enumerate_unit_paths",
    "enumerate_increasing_paths",
    "compatible_tuples",
    "unit_axis",
    "format_mindex",
]


class MultiIndex(tuple):
    """A point of N^q.

    Behaves like a tuple of ints (hashing, equality and the lexicographic
    ``<`` used for sorting are the tuple ones), except that ``+`` and ``-``
    act componentwise.  Use :func:`partial_leq` for the partial order.
    """

    __slots__ = ()

    def __new__(cls, coords: Iterable[int]):
        coords = tuple(coords)
        if not coords:
            raise DimensionError("a multi-index needs q >= 1 coordinates")
        for c in coords:
            if isinstance(c, bool) or int(c) != c or c < 0:
                raise ValueError(f"multi-index coordinates must be nonnegative integers, got {coords!r}")
        return super().__new__(cls, (int(c) for c in coords))

    @property
    def q(self) -> int:
        return len(self)

    @property
    def order(self) -> int:
        """|a|, the sum of the coordinates."""
        return sum(self)

    def _check(self, other) -> MultiIndex:
        other = other if isinstance(other, MultiIndex) else MultiIndex(other)
        if len(other) != len(self):
            raise DimensionError(f"dimension mismatch: q={len(self)} vs q={len(other)}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return MultiIndex(a + b for a, b in zip(self, other))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        return MultiIndex(a - b for a, b in zip(self, other))

    def factorial(self) -> int:
        """a! = a_1! ... a_q!"""
        return math.prod(math.factorial(c) for c in self)

    def __repr__(self):
        return f"MultiIndex({tuple(self)!r})"


def zero(q: int) -> MultiIndex:
    return MultiIndex((0,) * q)


def unit(q: int, r: int) -> MultiIndex:
    """The standard basis vector e_r, with r counted from 1."""
    if not 1 <= r <= q:
        raise ValueError(f"axis {r} out of range 1..{q}")
    return MultiIndex(1 if j == r - 1 else 0 for j in range(q))


def unit_axis(step: Sequence[int]) -> int | None:
    """Return r if ``step`` equals e_r, else None."""
    if sum(step) != 1 or any(c not in (0, 1) for c in step):
        return None
    return list(step).index(1) + 1


def _as_mindex(a) -> MultiIndex:
    return a if isinstance(a, MultiIndex) else MultiIndex(a)


def partial_leq(a, b) -> bool:
    """a <= b componentwise."""
    a, b = _as_mindex(a), _as_mindex(b)
    if len(a) != len(b):
        raise DimensionError(f"dimension mismatch: q={len(a)} vs q={len(b)}")
    return all(x <= y for x, y in zip(a, b))


def partial_lt(a, b) -> bool:
    return partial_leq(a, b) and tuple(a) != tuple(b)


def multinomial(counts: Iterable[int]) -> int:
    counts = list(counts)
    result = math.factorial(sum(counts))
    for c in counts:
        result //= math.factorial(c)
    return result


@dataclass(frozen=True)
class LatticePath:
    """A strictly increasing sequence of multi-indices."""

    points: tuple[MultiIndex, ...]

    def __post_init__(self):
        pts = tuple(_as_mindex(p) for p in self.points)
        if not pts:
            raise ValueError("a path needs at least one point")
        q = pts[0].q
        for a, b in zip(pts, pts[1:]):
            if b.q != q:
                raise DimensionError("all points of a path must share q")
            if not partial_lt(a, b):
                raise ValueError(f"path is not strictly increasing at {tuple(a)} -> {tuple(b)}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, *points) -> LatticePath:
        return cls(tuple(points))

    @property
    def q(self) -> int:
        return self.points[0].q

    @property
    def k(self) -> int:
        """Number of steps."""
        return len(self.points) - 1

    @property
    def steps(self) -> tuple[MultiIndex, ...]:
        return tuple(b - a for a, b in zip(self.points, self.points[1:]))

    def is_unit(self) -> bool:
        return all(unit_axis(s) is not None for s in self.steps)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, item):
        return self.points[item]


class CompatibleTuple(NamedTuple):
    """A prefix pattern (s, t): s_1 steps e_1, ..., s_q steps e_q, then t steps."""

    s: MultiIndex
    t: int

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(self.s) + (self.t,)


def enumerate_unit_paths(start, stop) -> list[LatticePath]:
    """All unit-step paths from ``start`` to ``stop``.

    Paths are listed in lexicographic order of their step sequences, where a
    step e_r is identified with r (so the path hugging axis 1 comes first).
    """
    start, stop = _as_mindex(start), _as_mindex(stop)
    if not partial_leq(start, stop):
        raise ValueError(f"{tuple(start)} is not <= {tuple(stop)}")
    q = start.q
    paths = []

    def walk(current, acc):
        if current == stop:
            paths.append(LatticePath(tuple(acc)))
            return
        for r in range(1, q + 1):
            if current[r - 1] < stop[r - 1]:
                nxt = current + unit(q, r)
                acc.append(nxt)
                walk(nxt, acc)
                acc.pop()

    walk(start, [start])
    return paths


def _box(lo: MultiIndex, hi: MultiIndex):
    ranges = [range(a, b + 1) for a, b in zip(lo, hi)]

    def rec(j):
        if j == len(ranges):
            yield ()
            return
        for v in ranges[j]:
            for rest in rec(j + 1):
                yield (v,) + rest

    return [MultiIndex(p) for p in rec(0)]


def enumerate_increasing_paths(start, stop, k: int) -> list[LatticePath]:
    """All chains ``start = i0 < i1 < ... < ik = stop`` with exactly k steps.

    Listed in lexicographic order of the point sequences.
    """
    start, stop = _as_mindex(start), _as_mindex(stop)
    if not partial_lt(start, stop):
        raise ValueError(f"{tuple(start)} is not < {tuple(stop)}")
    total = (stop - start).order
    if not 1 <= k <= total:
        raise ValueError(f"k={k} out of range 1..{total}")
    box = _box(start, stop)
    paths = []

    def walk(current, remaining, acc):
        if remaining == 0:
            if current == stop:
                paths.append(LatticePath(tuple(acc)))
            return
        for b in box:
            if not partial_lt(current, b):
                continue
            # each later step advances |.| by at least one
            if (stop - b).order < remaining - 1:
                continue
            if remaining == 1 and b != stop:
                continue
            acc.append(b)
            walk(b, remaining - 1, acc)
            acc.pop()

    walk(start, k, [start])
    return paths


def compatible_tuples(path) -> list[CompatibleTuple]:
    """All (s, t) compatible with ``path``, in order of decreasing t.

    (s, t) is compatible when the path starts with s_1 steps e_1, then s_2
    steps e_2, ..., then s_q steps e_q, followed by t arbitrary steps.
    """
    if not isinstance(path, LatticePath):
        path = LatticePath(tuple(path))
    q, k = path.q, path.k
    # longest prefix of unit steps with nondecreasing axis
    axes = []
    for step in path.steps:
        r = unit_axis(step)
        if r is None or (axes and r < axes[-1]):
            break
        axes.append(r)
    out = []
    for m in range(len(axes) + 1):
        counts = [0] * q
        for r in axes[:m]:
            counts[r - 1] += 1
        out.append(CompatibleTuple(MultiIndex(counts), k - m))
    return out


def format_mindex(a, style: str = "basis") -> str:
    """Render a multi-index.

    ``style="basis"`` gives ``0``, ``e1``, ``2e1+e2``; ``style="tuple"`` gives
    ``(2,1)``.
    """
    a = tuple(a)
    if style == "tuple":
        return "(" + ",".join(str(c) for c in a) + ")"
    if style != "basis":
        raise ValueError(f"unknown style {style!r}")
    parts = []
    for r, c in enumerate(a, start=1):
        if c == 1:
            parts.append(f"e{r}")
        elif c > 1:
            parts.append(f"{c}e{r}")
    return "+".join(parts) if parts else "0"
