"""Verification sweeps over the library's invariants.

Each suite returns a list of :class:`Check` records with the worst deviation
seen and the tolerance it was held to.  Deviations are relative:
``|a - b| / max(1, |a|, |b|)``.
"""
from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hideriv import coalesced_tree_form, derivative_corollary, enumerate_deriv_partitions, partition_coefficient
from .implicit import main_theorem_polygon, main_theorem_tree, r2prime
from .mindex import MultiIndex, enumerate_unit_paths, zero
from .oracle import CATALOG, direct_dd_y, make_problem, random_grid, random_point
from .polytree import Node, count_trees_by_outdegree, enumerate_partitions, enumerate_trees, enumerate_tprime, parse_tree

__all__ = [
    "Check",
    "rel_dev",
    "orders",
    "suite_equivalence",
    "suite_oracle",
    "suite_coefficients",
    "suite_counts",
    "SUITES",
    "plane_tree_profiles",
    "tprime_by_base_tree",
]

Q2_CASES = ("product", "sphere", "quadratic", "expgraph", "linear")


@dataclass
class Check:
    name: str
    deviation: float
    tolerance: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: worst {self.deviation:.3g} (tol {self.tolerance:g}){'  ' + self.detail if self.detail else ''}"


def rel_dev(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def orders(q: int, lo: int, hi: int) -> list[MultiIndex]:
    """All n in N^q with lo <= |n| <= hi, by total order then lexicographically."""
    out = []

    def rec(prefix, left):
        if len(prefix) == q - 1:
            out.append(prefix + (left,))
            return
        for v in range(left, -1, -1):
            rec(prefix + (v,), left - v)

    for total in range(lo, hi + 1):
        rec((), total)
    return [MultiIndex(n) for n in out]


def _sweep(seed: int, max_order: int, n_grids: int):
    """(case, n, problem, grid) over n_grids random grids per order."""
    rng = np.random.default_rng(seed)
    for k in range(n_grids):
        case = CATALOG[Q2_CASES[k % len(Q2_CASES)]]
        for n in orders(2, 2, max_order):
            grid = random_grid(case, n, rng)
            yield case, n, make_problem(case, grid), grid
    case = CATALOG["sphere3"]
    for n in orders(3, 3, 3):
        grid = random_grid(case, n, rng)
        yield case, n, make_problem(case, grid), grid


def suite_equivalence(seed: int = 0, max_order: int = 4, n_grids: int = 20) -> list[Check]:
    """Recursive, polygon and tree evaluators agree on random grids."""
    worst_rp = worst_pt = 0.0
    where = ""
    t0 = time.perf_counter()
    for case, n, prob, _ in _sweep(seed, max_order, n_grids):
        a, b, c = r2prime(prob, n), main_theorem_polygon(prob, n), main_theorem_tree(prob, n)
        d = max(rel_dev(a, b), rel_dev(a, c))
        if d > worst_rp:
            worst_rp, where = d, f"{case.name} n={tuple(n)}"
        worst_pt = max(worst_pt, rel_dev(b, c))
    elapsed = time.perf_counter() - t0
    return [
        Check("recursive vs polygon/tree", worst_rp, 1e-11, worst_rp <= 1e-11, where),
        Check("polygon vs tree", worst_pt, 1e-12, worst_pt <= 1e-12, f"{elapsed:.1f}s"),
    ]


def suite_oracle(seed: int = 0, max_order: int = 4, n_grids: int = 20) -> list[Check]:
    """Every evaluator matches the directly computed divided difference of y."""
    worst = {"recursive": 0.0, "polygon": 0.0, "tree": 0.0}
    for case, n, prob, grid in _sweep(seed, max_order, n_grids):
        ref = direct_dd_y(case, grid)
        for name, f in (("recursive", r2prime), ("polygon", main_theorem_polygon), ("tree", main_theorem_tree)):
            worst[name] = max(worst[name], rel_dev(f(prob, n), ref))
    return [Check(f"{name} vs direct divided difference", w, 1e-7, w <= 1e-7) for name, w in worst.items()]


def suite_coefficients(seed: int = 0, max_order: int = 4) -> list[Check]:
    """Tree census equals the multiset coefficients; both derivative forms agree."""
    rng = np.random.default_rng(seed)
    mismatches = []
    worst = 0.0
    for n in orders(2, 1, max_order):
        for name in Q2_CASES:
            case = CATALOG[name]
            x = random_point(case, rng)
            y = case.solve(x)
            value, census = coalesced_tree_form(case.provider, x, y, n)
            ref = derivative_corollary(case.provider, x, y, n)
            worst = max(worst, rel_dev(value * n.factorial(), ref))
        expected = {p: partition_coefficient(p) for p in enumerate_deriv_partitions(n)}
        if dict(census) != expected:
            mismatches.append(tuple(n))
    return [
        Check("census equals coefficient for every multiset", float(len(mismatches)), 0, not mismatches,
              f"mismatch at {mismatches}" if mismatches else f"|n| <= {max_order}"),
        Check("derivative formula vs coalesced tree form", worst, 1e-11, worst <= 1e-11),
    ]


@lru_cache(maxsize=None)
def _plane_trees(size: int) -> tuple[tuple[int, ...], ...]:
    """Preorder out-degree words of all plane trees with ``size`` vertices."""
    if size == 1:
        return ((0,),)
    out = []
    for forest in _forests(size - 1):
        out.append((len(forest),) + tuple(d for tree in forest for d in tree))
    return tuple(out)


@lru_cache(maxsize=None)
def _forests(size: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    if size == 0:
        return ((),)
    out = []
    for first in range(1, size + 1):
        for tree in _plane_trees(first):
            for rest in _forests(size - first):
                out.append((tree,) + rest)
    return tuple(out)


def plane_tree_profiles(max_vertices: int) -> Counter:
    """Counter of out-degree profiles over all plane trees up to a size.

    A profile is a sorted tuple of (degree, multiplicity) pairs.
    """
    census: Counter = Counter()
    for size in range(1, max_vertices + 1):
        for word in _plane_trees(size):
            census[tuple(sorted(Counter(word).items()))] += 1
    return census


def suite_counts(max_vertices: int = 8) -> list[Check]:
    """Partition counts, the out-degree tree count formula and typed-tree counts."""
    checks = []
    got = [len(enumerate_partitions(k + 1)) for k in range(2, 6)]
    checks.append(Check("polygon partitions for 3..6 vertices", 0.0 if got == [1, 3, 11, 45] else 1.0, 0,
                        got == [1, 3, 11, 45], str(got)))
    census = plane_tree_profiles(max_vertices)
    bad = [prof for prof, c in census.items() if count_trees_by_outdegree(dict(prof)) != c]
    checks.append(Check(f"out-degree count formula, all profiles up to {max_vertices} vertices", float(len(bad)), 0,
                        not bad, f"{len(census)} profiles"))
    e1, e2 = MultiIndex((1, 0)), MultiIndex((0, 1))
    path = (zero(2), e1, e1 + e2, e1 + e1 + e2)
    per_tree = tprime_by_base_tree(path, EXAMPLE_TREES)
    checks.append(Check("typed trees per base tree on (0, e1, e1+e2, 2e1+e2)", 0.0 if per_tree == [4, 3, 3] else 1.0,
                        0, per_tree == [4, 3, 3], str(per_tree)))
    total = sum(len(enumerate_tprime(p.points)) for p in enumerate_unit_paths(zero(2), e1 + e2))
    checks.append(Check("typed trees for n=(1,1)", 0.0 if total == 5 else 1.0, 0, total == 5, str(total)))
    return checks


def _contract(item):
    """Remove unary nodes."""
    if isinstance(item, Node):
        if len(item.children) == 1:
            return _contract(item.children[0])
        return Node(tuple(_contract(c) for c in item.children))
    return item


def tprime_by_base_tree(path, trees=None) -> list[int]:
    """Number of typed trees that reduce to each tree without unary nodes.

    ``trees`` lists the base trees in text form; the default is every tree
    in enumeration order.
    """
    grouped = Counter(_contract(t.root) for t in enumerate_tprime(path))
    bases = enumerate_trees(path) if trees is None else [parse_tree(t, path) for t in trees]
    return [grouped[base.root] for base in bases]


#: the three trees for the path (0, e1, e1+e2, 2e1+e2), as usually drawn
EXAMPLE_TREES = ("(0 (1 2))", "((0 1) 2)", "(0 1 2)")


SUITES = {
    "equivalence": suite_equivalence,
    "oracle": suite_oracle,
    "coefficients": suite_coefficients,
    "counts": suite_counts,
}
