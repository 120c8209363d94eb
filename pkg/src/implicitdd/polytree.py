"""Polygon partitions, plane trees, and the bijection between them.

Vertices of the polygon are the points p_0, ..., p_n of a lattice path.  All
combinatorics is done on vertex *positions* 0..n; the multi-index labels only
matter for star types.

Text formats (stable, used by golden files and the CLI):

* partition: faces in tree preorder, each as ``{a b c ...}`` of vertex
  positions, separated by single spaces, e.g. ``{0 2 3} {0 1 2}``;
* tree: a leaf is the position ``i`` of its edge (p_i, p_i+1), a nonleaf is
  ``(child child ...)``, a pending subtree slot is ``*``, e.g. ``((0 1) 2)``.
"""
from __future__ import annotations

import itertools
import math
import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence, Union

from .mindex import (
    CompatibleTuple,
    LatticePath,
    MultiIndex,
    compatible_tuples,
    unit_axis,
    zero,
)

__all__ = [
    "Leaf",
    "Node",
    "Stub",
    "PlaneTree",
    "PolygonPartition",
    "Star",
    "as_vertices",
    "enumerate_partitions",
    "partition_to_tree",
    "tree_to_partition",
    "enumerate_trees",
    "star_type",
    "stars",
    "extend_star",
    "enumerate_tprime",
    "is_tprime",
    "count_trees_by_outdegree",
    "parse_tree",
    "parse_partition",
]


@dataclass(frozen=True)
class Leaf:
    """Leaf for the outer edge (p_index, p_index+1)."""

    index: int


@dataclass(frozen=True)
class Stub:
    """Pending subtree slot covering the edge (p_lo, p_hi)."""

    lo: int
    hi: int


@dataclass(frozen=True)
class Node:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ValueError("a nonleaf needs at least one child")


TreeItem = Union[Leaf, Node, Stub]


def span(item: TreeItem) -> tuple[int, int]:
    if isinstance(item, Leaf):
        return item.index, item.index + 1
    if isinstance(item, Stub):
        return item.lo, item.hi
    return span(item.children[0])[0], span(item.children[-1])[1]


def label(item: TreeItem) -> tuple[int, ...]:
    """Vertex positions labelling ``item``: endpoints of consecutive children."""
    if not isinstance(item, Node):
        return span(item)
    spans = [span(c) for c in item.children]
    for (_, b), (a, _) in zip(spans, spans[1:]):
        if a != b:
            raise ValueError("children of a node do not cover consecutive edges")
    return (spans[0][0],) + tuple(hi for _, hi in spans)


def _preorder(item: TreeItem):
    if isinstance(item, Node):
        yield item
        for c in item.children:
            yield from _preorder(c)


def _leaves(item: TreeItem):
    if isinstance(item, Leaf):
        yield item
    elif isinstance(item, Node):
        for c in item.children:
            yield from _leaves(c)


def _to_text(item: TreeItem) -> str:
    if isinstance(item, Leaf):
        return str(item.index)
    if isinstance(item, Stub):
        return "*"
    return "(" + " ".join(_to_text(c) for c in item.children) + ")"


def as_vertices(vertices) -> tuple[MultiIndex, ...]:
    """Normalise a vertex spec; an int m means m vertices 0, e1, 2e1, ... (q=1)."""
    if isinstance(vertices, int):
        return tuple(MultiIndex((i,)) for i in range(vertices))
    if isinstance(vertices, LatticePath):
        return vertices.points
    return tuple(v if isinstance(v, MultiIndex) else MultiIndex(v) for v in vertices)


@dataclass(frozen=True)
class PlaneTree:
    """An ordered tree whose leaves are the edges (p_i, p_i+1) left to right."""

    vertices: tuple[MultiIndex, ...]
    root: Node

    def __post_init__(self):
        object.__setattr__(self, "vertices", as_vertices(self.vertices))
        if not isinstance(self.root, Node):
            raise ValueError("the root of a plane tree must be a nonleaf")
        lo, hi = span(self.root)
        if (lo, hi) != (0, len(self.vertices) - 1):
            raise ValueError(f"tree spans positions {lo}..{hi}, expected 0..{len(self.vertices) - 1}")
        label(self.root)
        for node in _preorder(self.root):
            label(node)

    @property
    def n(self) -> int:
        return len(self.vertices) - 1

    def nonleaves(self) -> list[Node]:
        return list(_preorder(self.root))

    def leaves(self) -> list[Leaf]:
        return list(_leaves(self.root))

    def labels(self) -> list[tuple[int, ...]]:
        """Labels of the nonleaves in preorder (vertex positions)."""
        return [label(v) for v in _preorder(self.root)]

    def label_points(self, item: TreeItem) -> tuple[MultiIndex, ...]:
        return tuple(self.vertices[i] for i in label(item))

    def to_text(self) -> str:
        return _to_text(self.root)

    def __str__(self):
        return self.to_text()


@dataclass(frozen=True)
class PolygonPartition:
    """A dissection of the convex polygon p_0 ... p_n by noncrossing diagonals.

    ``faces`` are tuples of vertex positions.  On construction the face set is
    validated and reordered into tree preorder (the face holding the edge
    (p_0, p_n) first).
    """

    vertices: tuple[MultiIndex, ...]
    faces: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        vertices = as_vertices(self.vertices)
        object.__setattr__(self, "vertices", vertices)
        n = len(vertices) - 1
        if n < 2:
            raise ValueError("a polygon needs at least 3 vertices")
        faces = []
        for f in self.faces:
            f = tuple(int(i) for i in f)
            if len(f) < 3:
                raise ValueError(f"face {f} has fewer than 3 vertices")
            if any(b <= a for a, b in zip(f, f[1:])) or f[0] < 0 or f[-1] > n:
                raise ValueError(f"face {f} is not an increasing subsequence of 0..{n}")
            faces.append(f)
        if len(set(faces)) != len(faces):
            raise ValueError("duplicate face")
        edges = Counter()
        for f in faces:
            for e in zip(f, f[1:]):
                edges[e] += 1
            edges[(f[0], f[-1])] += 1
        outer = {(i, i + 1) for i in range(n)} | {(0, n)}
        for e in outer:
            if edges.get(e, 0) != 1:
                raise ValueError(f"outer edge {e} lies in {edges.get(e, 0)} faces, expected 1")
        inner = [e for e in edges if e not in outer]
        for e in inner:
            if edges[e] != 2:
                raise ValueError(f"inner edge {e} lies in {edges[e]} faces, expected 2")
        for (a, b), (c, d) in itertools.combinations(inner, 2):
            if a < c < b < d or c < a < d < b:
                raise ValueError(f"diagonals {(a, b)} and {(c, d)} cross")
        by_edge = {(f[0], f[-1]): f for f in faces}
        ordered = []

        def walk(lo, hi):
            f = by_edge[(lo, hi)]
            ordered.append(f)
            for a, b in zip(f, f[1:]):
                if b - a >= 2:
                    walk(a, b)

        walk(0, n)
        if len(ordered) != len(faces):
            raise ValueError("faces do not tile the polygon")
        object.__setattr__(self, "faces", tuple(ordered))

    @property
    def n(self) -> int:
        return len(self.vertices) - 1

    def diagonals(self) -> list[tuple[int, int]]:
        return sorted((f[0], f[-1]) for f in self.faces if (f[0], f[-1]) != (0, self.n))

    def face_points(self) -> list[tuple[MultiIndex, ...]]:
        return [tuple(self.vertices[i] for i in f) for f in self.faces]

    def to_text(self) -> str:
        return " ".join("{" + " ".join(str(i) for i in f) + "}" for f in self.faces)

    def __str__(self):
        return self.to_text()

    def __eq__(self, other):
        if not isinstance(other, PolygonPartition):
            return NotImplemented
        return self.vertices == other.vertices and set(self.faces) == set(other.faces)

    def __hash__(self):
        return hash((self.vertices, frozenset(self.faces)))


@lru_cache(maxsize=None)
def _partition_shapes(lo: int, hi: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All dissections of the polygon lo..hi as face tuples in preorder."""
    if hi - lo < 2:
        return ((),)
    out = []
    interior = range(lo + 1, hi)
    for r in range(1, hi - lo):
        for chosen in itertools.combinations(interior, r):
            face = (lo,) + chosen + (hi,)
            sub = [_partition_shapes(a, b) for a, b in zip(face, face[1:])]
            for combo in itertools.product(*sub):
                out.append((face,) + tuple(itertools.chain.from_iterable(combo)))
    return tuple(out)


def _shape_key(faces):
    # faces[0] is the root face; the others are closed off by one diagonal each
    return (len(faces), sorted((f[0], f[-1]) for f in faces[1:]))


@lru_cache(maxsize=None)
def _sorted_shapes(n: int):
    return tuple(sorted(_partition_shapes(0, n), key=_shape_key))


def enumerate_partitions(vertices) -> list[PolygonPartition]:
    """All partitions of the polygon with the given vertices.

    Ordered by number of faces, then lexicographically by sorted diagonals;
    the first entry is the single-face partition.
    """
    vertices = as_vertices(vertices)
    if len(vertices) < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    return [PolygonPartition(vertices, faces) for faces in _sorted_shapes(len(vertices) - 1)]


def partition_to_tree(partition: PolygonPartition) -> PlaneTree:
    """Root at the edge (p_0, p_n); children of a face are its remaining edges
    taken in boundary order; outer edges become leaves."""
    by_edge = {(f[0], f[-1]): f for f in partition.faces}

    def build(lo, hi):
        f = by_edge[(lo, hi)]
        return Node(tuple(Leaf(a) if b == a + 1 else build(a, b) for a, b in zip(f, f[1:])))

    return PlaneTree(partition.vertices, build(0, partition.n))


def tree_to_partition(tree: PlaneTree) -> PolygonPartition:
    """Inverse of :func:`partition_to_tree`: the faces are the nonleaf labels."""
    for node in tree.nonleaves():
        if len(node.children) < 2:
            raise ValueError(f"tree has a unary nonleaf at {label(node)}")
        if any(isinstance(c, Stub) for c in node.children):
            raise ValueError("tree has pending subtree slots")
    if [leaf.index for leaf in tree.leaves()] != list(range(tree.n)):
        raise ValueError("leaves are not labelled 0..n-1 in depth-first order")
    return PolygonPartition(tree.vertices, tuple(tree.labels()))


def enumerate_trees(vertices) -> list[PlaneTree]:
    """Plane trees with n ordered leaves and no unary nonleaf, in partition order."""
    return [partition_to_tree(p) for p in enumerate_partitions(vertices)]


@dataclass(frozen=True)
class Star:
    """A nonleaf with its ordered children, remembering which are leaves.

    ``label`` is the root label (i_0, ..., i_k) as multi-indices; child j spans
    (i_{j-1}, i_j).
    """

    label: tuple[MultiIndex, ...]
    leaf: tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "label", as_vertices(self.label))
        object.__setattr__(self, "leaf", tuple(bool(b) for b in self.leaf))
        if len(self.leaf) != len(self.label) - 1:
            raise ValueError("a star with label of length k+1 has k children")


def star_type(star: Star) -> CompatibleTuple | None:
    """The type (s, t) of a star, or None when the children do not read
    "s_1 leaves stepping e_1, ..., s_q leaves stepping e_q, t nonleaves"."""
    q = star.label[0].q
    counts = [0] * q
    j, k = 0, len(star.leaf)
    last_axis = 0
    while j < k and star.leaf[j]:
        r = unit_axis(star.label[j + 1] - star.label[j])
        if r is None or r < last_axis:
            return None
        counts[r - 1] += 1
        last_axis = r
        j += 1
    if not all(not is_leaf for is_leaf in star.leaf[j:]):
        return None
    return CompatibleTuple(MultiIndex(counts), k - j)


def stars(tree: PlaneTree) -> list[Star]:
    """Stars of the nonleaves of ``tree`` in preorder."""
    return [
        Star(tree.label_points(v), tuple(isinstance(c, Leaf) for c in v.children))
        for v in tree.nonleaves()
    ]


def _extend_children(children, t: int):
    """Wrap every leaf among the final t children in a new unary nonleaf."""
    k = len(children)
    head = children[: k - t]
    tail = tuple(Node((c,)) if isinstance(c, Leaf) else c for c in children[k - t:])
    return tuple(head) + tail


def extend_star(star: Star, s, t: int) -> PlaneTree:
    """The tree obtained from a star by inserting an edge above each leaf among
    its final t children.  Nonleaf children become pending slots (:class:`Stub`)."""
    s = s if isinstance(s, MultiIndex) else MultiIndex(s)
    options = compatible_tuples(LatticePath(star.label))
    if CompatibleTuple(s, t) not in options:
        raise ValueError(f"(s, t) = ({tuple(s)}, {t}) is not compatible with the star label")
    k = len(star.leaf)
    if not all(star.leaf[: k - t]):
        raise ValueError("a nonleaf child lies inside the leading unit-step block")
    children = tuple(Leaf(j) if is_leaf else Stub(j, j + 1) for j, is_leaf in enumerate(star.leaf))
    return PlaneTree(star.label, Node(_extend_children(children, t)))


def _label_path(vertices, positions):
    return LatticePath(tuple(vertices[i] for i in positions))


@lru_cache(maxsize=None)
def _tprime_cached(vertices: tuple[MultiIndex, ...]) -> tuple[PlaneTree, ...]:
    n = len(vertices) - 1
    if n == 1:
        only = PlaneTree(vertices, Node((Leaf(0),)))
        return (only,) if is_tprime(only) else ()
    out = []
    for tree in enumerate_trees(vertices):
        nodes = tree.nonleaves()
        options = [compatible_tuples(_label_path(vertices, label(v))) for v in nodes]
        for choice in itertools.product(*options):
            chosen = {label(v): ct for v, ct in zip(nodes, choice)}

            def rebuild(item):
                if not isinstance(item, Node):
                    return item
                ct = chosen[label(item)]
                kids = tuple(rebuild(c) for c in item.children)
                return Node(_extend_children(kids, ct.t))

            out.append(PlaneTree(vertices, rebuild(tree.root)))
    return tuple(out)


def enumerate_tprime(vertices) -> list[PlaneTree]:
    """Trees obtained from each no-unary tree by extending every star by one of
    its compatible tuples (generative construction)."""
    vertices = as_vertices(vertices)
    if len(vertices) < 2:
        raise ValueError("need at least 2 vertices")
    return list(_tprime_cached(vertices))


def is_tprime(tree: PlaneTree) -> bool:
    """Recognitive test: every star typed, none of type (0, 1)."""
    if [leaf.index for leaf in tree.leaves()] != list(range(tree.n)):
        return False
    q = tree.vertices[0].q
    forbidden = CompatibleTuple(zero(q), 1)
    for node in tree.nonleaves():
        if any(isinstance(c, Stub) for c in node.children):
            return False
    for st in stars(tree):
        ty = star_type(st)
        if ty is None or ty == forbidden:
            return False
    return True


def count_trees_by_outdegree(r: Mapping[int, int] | Sequence[int]) -> int:
    """Number of plane trees with r[d] vertices of out-degree d.

    Equals (1/N) * multinomial(N; r_0, r_1, ...) with N the vertex count.
    """
    if not isinstance(r, Mapping):
        r = dict(enumerate(r))
    if any(d < 0 or c < 0 for d, c in r.items()):
        raise ValueError("degrees and counts must be nonnegative")
    total = sum(r.values())
    if r.get(0, 0) < 1:
        raise ValueError("a tree needs at least one leaf")
    if sum(d * c for d, c in r.items()) != total - 1:
        raise ValueError("infeasible degree sequence: edges must number vertices - 1")
    numer = math.factorial(total)
    for c in r.values():
        numer //= math.factorial(c)
    q, rem = divmod(numer, total)
    assert rem == 0
    return q


_TOKEN = re.compile(r"\s*(?:(\()|(\))|(\*)|(\d+))")


def parse_tree(text: str, vertices) -> PlaneTree:
    """Inverse of :meth:`PlaneTree.to_text`.  Stubs ``*`` get their span from
    their neighbours, so they may not be the only child of a node."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad tree text at position {pos}: {text!r}")
        tokens.append(m.group(0).strip())
        pos = m.end()
    it = iter(tokens)
    cursor = [0]

    def item(tok):
        if tok == "(":
            kids = []
            for nxt in it:
                if nxt == ")":
                    return Node(tuple(kids))
                kids.append(item(nxt))
            raise ValueError("unbalanced parentheses")
        if tok == "*":
            lo = cursor[0]
            cursor[0] += 1
            return Stub(lo, lo + 1)
        if tok == ")":
            raise ValueError("unexpected ')'")
        leaf = Leaf(int(tok))
        cursor[0] = leaf.index + 1
        return leaf

    root = item(next(it))
    if next(it, None) is not None:
        raise ValueError("trailing tokens after tree")
    return PlaneTree(vertices, root)


def parse_partition(text: str, vertices) -> PolygonPartition:
    faces = [tuple(int(x) for x in body.split()) for body in re.findall(r"\{([^}]*)\}", text)]
    return PolygonPartition(vertices, tuple(faces))
