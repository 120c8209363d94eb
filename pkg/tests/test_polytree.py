import itertools
import math
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from implicitdd.mindex import MultiIndex, compatible_tuples, enumerate_unit_paths, zero
from implicitdd.polytree import (
    Leaf,
    Node,
    PlaneTree,
    PolygonPartition,
    Star,
    Stub,
    as_vertices,
    count_trees_by_outdegree,
    enumerate_partitions,
    enumerate_tprime,
    enumerate_trees,
    extend_star,
    is_tprime,
    parse_partition,
    parse_tree,
    partition_to_tree,
    star_type,
    stars,
    tree_to_partition,
)
from implicitdd.verify import plane_tree_profiles, tprime_by_base_tree

E1, E2 = MultiIndex((1, 0)), MultiIndex((0, 1))
EXAMPLE_PATH = (zero(2), E1, E1 + E2, E1 + E1 + E2)


def _brute_force_partitions(n):
    """Noncrossing diagonal sets of the (n+1)-gon, by brute force."""
    diags = [(a, b) for a in range(n + 1) for b in range(a + 2, n + 1) if (a, b) != (0, n)]
    count = 0
    for r in range(len(diags) + 1):
        for chosen in itertools.combinations(diags, r):
            if all(not (a < c < b < d or c < a < d < b) for (a, b), (c, d) in itertools.combinations(chosen, 2)):
                count += 1
    return count


@pytest.mark.parametrize("vertices, count", [(3, 1), (4, 3), (5, 11), (6, 45), (7, 197), (8, 903)])
def test_partition_counts_are_little_schroeder(vertices, count):
    assert len(enumerate_partitions(vertices)) == count


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_partition_counts_match_brute_force(n):
    assert len(enumerate_partitions(n + 1)) == _brute_force_partitions(n)


def test_square_partitions_in_order():
    texts = [p.to_text() for p in enumerate_partitions(4)]
    assert texts == ["{0 1 2 3}", "{0 2 3} {0 1 2}", "{0 1 3} {1 2 3}"]


def test_partitions_are_distinct():
    parts = enumerate_partitions(7)
    assert len(set(parts)) == len(parts)


@pytest.mark.parametrize(
    "faces",
    [
        [(0, 1, 2), (0, 2, 3), (1, 2, 3)],  # overlapping faces
        [(0, 2, 3), (1, 2)],  # short face
        [(0, 1, 3), (0, 2, 3)],  # outer edge used twice / gaps
        [(0, 2, 4), (0, 1, 2), (2, 3, 4), (1, 3)],
    ],
)
def test_invalid_partitions_rejected(faces):
    with pytest.raises(ValueError):
        PolygonPartition(as_vertices(5), tuple(faces))


def test_crossing_diagonals_rejected():
    with pytest.raises(ValueError):
        PolygonPartition(as_vertices(4), ((0, 2, 3), (0, 1, 2), (0, 1, 3), (1, 2, 3)))


def test_fan_triangulation_tree():
    # fan from p0 of the square: diagonal (0, 2)
    part = PolygonPartition(as_vertices(4), ((0, 1, 2), (0, 2, 3)))
    tree = partition_to_tree(part)
    assert tree.to_text() == "((0 1) 2)"
    assert isinstance(tree.root.children[0], Node) and isinstance(tree.root.children[1], Leaf)


def test_octagon_example_both_directions():
    faces = ((0, 5, 6, 7), (0, 2, 5), (0, 1, 2), (2, 4, 5), (2, 3, 4))
    part = PolygonPartition(as_vertices(8), faces)
    tree = partition_to_tree(part)
    assert tree.to_text() == "(((0 1) ((2 3) 4)) 5 6)"
    back = tree_to_partition(parse_tree("(((0 1) ((2 3) 4)) 5 6)", as_vertices(8)))
    assert back == part
    assert back.faces == faces


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_bijection_round_trip(n):
    parts = enumerate_partitions(n + 1)
    trees = [partition_to_tree(p) for p in parts]
    assert len({t.root for t in trees}) == len(parts)
    for p, t in zip(parts, trees):
        assert tree_to_partition(t) == p
        assert len(t.nonleaves()) == len(p.faces)
        assert [leaf.index for leaf in t.leaves()] == list(range(n))


def test_tree_to_partition_rejects_unary_and_stubs():
    verts = as_vertices(3)
    with pytest.raises(ValueError):
        tree_to_partition(PlaneTree(verts, Node((Node((Leaf(0),)), Leaf(1)))))
    with pytest.raises(ValueError):
        tree_to_partition(PlaneTree(verts, Node((Stub(0, 1), Leaf(1)))))
    with pytest.raises(ValueError):
        tree_to_partition(PlaneTree(verts, Node((Leaf(1), Leaf(0)))))


def test_text_round_trip():
    for tree in enumerate_trees(6):
        assert parse_tree(tree.to_text(), tree.vertices) == tree
    for part in enumerate_partitions(6):
        assert parse_partition(part.to_text(), part.vertices) == part


def test_parse_tree_errors():
    with pytest.raises(ValueError):
        parse_tree("((0 1) 2", as_vertices(4))
    with pytest.raises(ValueError):
        parse_tree("(0 1) 2", as_vertices(4))
    with pytest.raises(ValueError):
        parse_tree("(0 x)", as_vertices(3))


def test_star_type_of_mixed_star():
    # path 2e1, 3e1, 4e1, 4e1+e2, 5e1+3e2 with children leaf, leaf, leaf, nonleaf
    label = [(2, 0), (3, 0), (4, 0), (4, 1), (5, 3)]
    assert star_type(Star(label, (True, True, True, False))).as_tuple() == (2, 1, 1)


@pytest.mark.parametrize(
    "label, leaf, expected",
    [
        ([(0, 0), (1, 0)], (True,), (1, 0, 0)),
        ([(0, 0), (0, 1), (1, 1)], (True, True), None),  # leaf stepping e1 after one stepping e2
        ([(0, 0), (1, 0), (1, 1)], (False, True), None),  # leaf after nonleaf
        ([(0, 0), (2, 0)], (False,), (0, 0, 1)),
    ],
)
def test_star_types(label, leaf, expected):
    ty = star_type(Star(label, leaf))
    if expected is None:
        assert ty is None
    else:
        assert ty.as_tuple() == expected


def test_extend_star_example():
    label = (zero(2), E1, E1 + E1 + E2)
    star = Star(label, (True, False))
    assert extend_star(star, (1, 0), 1).root == Node((Leaf(0), Stub(1, 2)))
    wrapped = extend_star(star, (0, 0), 2)
    assert wrapped.root == Node((Node((Leaf(0),)), Stub(1, 2)))
    with pytest.raises(ValueError):
        extend_star(star, (1, 1), 0)


def test_tprime_example_counts():
    assert tprime_by_base_tree(EXAMPLE_PATH, ("(0 (1 2))", "((0 1) 2)", "(0 1 2)")) == [4, 3, 3]
    assert len(enumerate_tprime(EXAMPLE_PATH)) == 10


def test_tprime_two_by_two_example():
    counts = [len(enumerate_tprime(p.points)) for p in enumerate_unit_paths(zero(2), E1 + E2)]
    assert counts == [3, 2]


def test_tprime_single_edge():
    trees = enumerate_tprime((zero(2), E1))
    assert len(trees) == 1
    assert star_type(stars(trees[0])[0]).as_tuple() == (1, 0, 0)


def _all_trees_with_leaves(n, max_depth):
    """Every plane tree with leaves 0..n-1 in order and bounded depth."""

    def forests(lo, hi, depth):
        if lo == hi:
            yield ()
            return
        for mid in range(lo + 1, hi + 1):
            for first in trees(lo, mid, depth):
                for rest in forests(mid, hi, depth):
                    yield (first,) + rest

    def trees(lo, hi, depth):
        if hi - lo == 1:
            yield Leaf(lo)
        if depth > 0:
            for kids in forests(lo, hi, depth - 1):
                yield Node(kids)

    return [t for t in trees(0, n, max_depth) if isinstance(t, Node)]


@pytest.mark.parametrize("path", [EXAMPLE_PATH, (zero(2), E1, E1 + E2), ((0,), (1,), (2,), (3,))])
def test_tprime_generative_equals_recognitive(path):
    verts = as_vertices(path)
    n = len(verts) - 1
    # a typed tree has at most one unary node above each leaf, so depth <= 2n
    candidates = _all_trees_with_leaves(n, 2 * n)
    assert len(candidates) == len(set(candidates))
    recognised = {root for root in candidates if is_tprime(PlaneTree(verts, root))}
    generated = [t.root for t in enumerate_tprime(verts)]
    assert len(generated) == len(set(generated))
    assert set(generated) == recognised


@given(st.lists(st.sampled_from([E1, E2]), min_size=1, max_size=4))
def test_tprime_count_is_product_of_compatible_counts(steps):
    pts = [zero(2)]
    for s in steps:
        pts.append(pts[-1] + s)
    pts = tuple(pts)
    if len(pts) == 2:
        assert len(enumerate_tprime(pts)) == 1
        return
    expected = 0
    for tree in enumerate_trees(pts):
        expected += math.prod(len(compatible_tuples([pts[i] for i in tree.labels()[j]]))
                              for j in range(len(tree.nonleaves())))
    trees = enumerate_tprime(pts)
    assert len(trees) == expected
    assert all(is_tprime(t) for t in trees)


@pytest.mark.parametrize("r, count", [({0: 1}, 1), ({0: 2, 2: 1}, 1), ({0: 2, 1: 1, 2: 1}, 3), ({0: 3, 1: 0, 3: 1}, 1)])
def test_count_trees_by_outdegree(r, count):
    assert count_trees_by_outdegree(r) == count


def test_count_trees_by_outdegree_accepts_sequence():
    assert count_trees_by_outdegree([2, 1, 1]) == 3


@pytest.mark.parametrize("r", [{0: 1, 1: 1, 2: 1}, {1: 1}, {0: 2}])
def test_count_trees_by_outdegree_infeasible(r):
    with pytest.raises(ValueError):
        count_trees_by_outdegree(r)


def test_outdegree_formula_exhaustive_up_to_eight_vertices():
    census = plane_tree_profiles(8)
    assert sum(census.values()) == sum(math.comb(2 * (m - 1), m - 1) // m for m in range(1, 9))
    for profile, count in census.items():
        assert count_trees_by_outdegree(dict(profile)) == count


def test_star_listing_is_preorder():
    tree = parse_tree("(((0 1) ((2 3) 4)) 5 6)", as_vertices(8))
    assert [tuple(p[0] for p in s.label) for s in stars(tree)] == [
        (0, 5, 6, 7), (0, 2, 5), (0, 1, 2), (2, 4, 5), (2, 3, 4)
    ]
    assert Counter(len(s.leaf) for s in stars(tree)) == Counter({3: 1, 2: 4})
