from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from implicitdd.ddcore import ExprGProvider, Grid
from implicitdd.errors import DimensionError, InconsistentPointError, SingularConfigurationError
from implicitdd.implicit import (
    GBracket,
    ImplicitProblem,
    Quotient,
    TermExpr,
    curly_bracket,
    curly_terms,
    emit_curly_terms,
    emit_terms,
    main_theorem_polygon,
    main_theorem_tree,
    r1,
    r2prime,
)
from implicitdd.mindex import MultiIndex
from implicitdd.oracle import CATALOG, direct_dd_y, make_problem, random_grid

EVALUATORS = [r2prime, main_theorem_polygon, main_theorem_tree]


def explicit_problem(poly: str, grid: Grid) -> ImplicitProblem:
    """y = poly(x) written implicitly as g = y - poly."""
    q = grid.q
    g = ExprGProvider(f"y - ({poly})", q)
    from implicitdd.exprsym import evaluate, parse

    e = parse(poly, q)
    return ImplicitProblem(g, grid, grid.sample(lambda p: evaluate(e, tuple(p) + (0.0,))))


def test_r1_on_product():
    grid = Grid(([0.5, 1.25], [0.75, 1.5]))
    prob = explicit_problem("x1*x2", grid)
    assert r1(prob, (0, 0), 1) == pytest.approx(0.75)
    assert r1(prob, (0, 1), 1) == pytest.approx(1.5)
    assert r1(prob, (1, 0), 2) == pytest.approx(1.25)


def test_r1_of_cube_on_symmetric_nodes():
    # [-a, a] x^3 = a^2 - a^2 + a^2
    grid = Grid(([-0.4, 0.4],))
    prob = explicit_problem("x1^3", grid)
    assert r1(prob, (0,), 1) == pytest.approx(0.16)


@pytest.mark.parametrize("f", EVALUATORS)
@pytest.mark.parametrize(
    "poly, nodes, expected",
    [
        # degree-(2,1) monomial: the order-(2,1) difference is its leading coefficient
        ("3*x1^2*x2 + x1 - 7", ([0.1, 0.5, 0.9], [0.2, 0.8]), 3.0),
        # x1^3 x2^2 over order (2,1): (sum of x1 nodes) * (sum of x2 nodes)
        ("x1^3*x2^2", ([0.1, 0.5, 0.9], [0.2, 0.8]), 1.5 * 1.0),
        # affine y: every difference of order >= 2 vanishes
        ("2*x1 - 3*x2 + 1", ([0.1, 0.5, 0.9], [0.2, 0.8]), 0.0),
    ],
)
def test_polynomial_exactness(f, poly, nodes, expected):
    prob = explicit_problem(poly, Grid(nodes))
    assert f(prob, (2, 1)) == pytest.approx(expected, abs=1e-11)


@pytest.mark.parametrize("name", ["product", "sphere", "quadratic", "expgraph"])
@pytest.mark.parametrize("n", [(2, 0), (1, 1), (3, 1), (2, 2)])
def test_evaluators_agree_with_direct_differences(name, n, rng):
    case = CATALOG[name]
    grid = random_grid(case, n, rng)
    prob = make_problem(case, grid)
    ref = direct_dd_y(case, grid)
    vals = [f(prob, n) for f in EVALUATORS]
    for v in vals:
        assert v == pytest.approx(ref, rel=1e-7, abs=1e-7)
    assert vals[0] == pytest.approx(vals[1], rel=1e-11, abs=1e-11)
    assert vals[1] == pytest.approx(vals[2], rel=1e-12, abs=1e-12)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_translation_covariance(seed):
    case = CATALOG["sphere"]
    rng = np.random.default_rng(seed)
    grid = random_grid(case, (3, 2), rng)
    prob = make_problem(case, grid)
    base, n = MultiIndex((1, 1)), MultiIndex((2, 1))
    sub = make_problem(case, grid.sub(base, base + n))
    for f in EVALUATORS:
        assert f(prob, n, base) == pytest.approx(f(sub, n), rel=1e-12, abs=1e-12)


def test_curly_bracket_of_one_step_is_r1():
    case = CATALOG["quadratic"]
    prob = make_problem(case, random_grid(case, (1, 1), 3))
    assert curly_bracket(prob, [(0, 0), (0, 1)]) == r1(prob, (0, 0), 2)
    assert len(curly_terms([(0, 0), (1, 0)])) == 1


def test_singular_denominator_is_refused():
    # y = +1 at the first node and -1 at the second: [.|y0 y1](y^2) = y0 + y1 = 0
    g = ExprGProvider("y^2 - 1 + 0*x1", 1)
    prob = ImplicitProblem(g, Grid(([0.0, 1.0],)), [1.0, -1.0])
    with pytest.raises(SingularConfigurationError, match="vanishes"):
        r1(prob, (0,), 1)


def test_inconsistent_y_values():
    g = ExprGProvider("y - x1", 1)
    with pytest.raises(InconsistentPointError):
        ImplicitProblem(g, Grid(([0.0, 1.0],)), [0.0, 1.5])


def test_problem_shape_and_dimension_checks():
    g = ExprGProvider("y - x1", 1)
    with pytest.raises(DimensionError):
        ImplicitProblem(g, Grid(([0.0, 1.0],)), [0.0, 1.0, 2.0])
    with pytest.raises(DimensionError):
        ImplicitProblem(ExprGProvider("y - x1", 2), Grid(([0.0, 1.0],)), [0.0, 1.0])
    with pytest.raises(ValueError, match="missing"):
        ImplicitProblem(g, Grid(([0.0, 1.0],)), {(0,): 0.0})
    prob = ImplicitProblem(g, Grid(([0.0, 1.0],)), {(0,): 0.0, (1,): 1.0})
    with pytest.raises(ValueError, match="exceeds the grid"):
        r2prime(prob, (2,))


def test_term_formatting_and_sign():
    b = GBracket(MultiIndex((0,)), MultiIndex((1,)), (MultiIndex((1,)),))
    d = GBracket(MultiIndex((0,)), MultiIndex((0,)), (MultiIndex((0,)), MultiIndex((1,))))
    t = TermExpr((Quotient(b, d),))
    assert t.sign == -1
    assert t.format() == "-[0 1|e1]g/[0|0 e1]g"
    assert TermExpr((Quotient(b, d),) * 2).sign == 1


@pytest.mark.parametrize("n", [(2,), (3,), (1, 1), (2, 1), (1, 1, 1), (2, 2)])
def test_polygon_and_tree_expansions_list_the_same_terms(n):
    # same products; polygon mode keeps face order, tree mode star preorder
    def key(t):
        return (t.sign, tuple(sorted(f.format() for f in t.factors)))

    assert Counter(map(key, emit_terms(n, "polygon"))) == Counter(map(key, emit_terms(n, "tree")))


@pytest.mark.parametrize("n, count", [((1, 0), 1), ((2, 0), 3), ((1, 1), 5)])
def test_term_counts(n, count):
    assert len(emit_terms(n, "tree")) == count
    assert len(emit_terms(n, "polygon")) == count


def test_term_count_along_one_path():
    from implicitdd.polytree import enumerate_tprime

    path = [(0, 0), (1, 0), (1, 1), (2, 1)]
    assert len(enumerate_tprime(path)) == 10


def test_curly_products_for_mixed_order():
    assert [c.format() for c in emit_curly_terms((1, 1))] == ["{0 e1 e1+e2}g", "{0 e2 e1+e2}g"]
    with pytest.raises(ValueError):
        emit_curly_terms((1, 0))


def test_emitted_terms_evaluate_to_the_difference():
    case = CATALOG["expgraph"]
    prob = make_problem(case, random_grid(case, (2, 1), 11))
    total = sum(t.value(prob) for t in emit_terms((2, 1), "polygon"))
    assert total == pytest.approx(r2prime(prob, (2, 1)), rel=1e-11)


def test_extended_precision_problem_matches_float():
    case = CATALOG["sphere"]
    grid = random_grid(case, (2, 1), 5)
    a = main_theorem_tree(make_problem(case, grid), (2, 1))
    b = main_theorem_tree(make_problem(case, grid, dps=30), (2, 1))
    assert a == pytest.approx(b, rel=1e-10)
