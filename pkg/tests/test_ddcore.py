import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from implicitdd.ddcore import (
    ExprGProvider,
    Grid,
    check_distinct,
    coalesced_dd_to_partial,
    divided_difference,
    g_divided_difference,
    g_tensor_dd,
    working_precision,
)
from implicitdd.errors import CoincidentNodesError, DimensionError
from implicitdd.exprsym import diff_multi, evaluate, parse


def test_second_difference_of_square_is_one():
    grid = Grid(([0.0, 1.0, 3.0],))
    assert divided_difference(grid.sample(lambda p: p[0] ** 2), grid) == pytest.approx(1.0)


def test_first_difference_of_square():
    grid = Grid(([0.0, 1.0],))
    assert divided_difference(grid.sample(lambda p: p[0] ** 2), grid) == pytest.approx(1.0)


def test_product_over_unit_square():
    grid = Grid(([0.0, 1.0], [0.0, 1.0]))
    assert divided_difference(grid.sample(lambda p: p[0] * p[1]), grid) == pytest.approx(1.0)


def test_single_point_grid_returns_value():
    grid = Grid(([0.3], [0.7]))
    assert divided_difference([[2.5]], grid) == 2.5


def test_grid_properties():
    grid = Grid(([0.0, 0.5, 1.0], [1.0, 2.0]))
    assert grid.q == 2
    assert grid.shape == (3, 2)
    assert tuple(grid.order) == (2, 1)
    assert grid.point((1, 1)) == (0.5, 2.0)
    sub = grid.sub((1, 0), (2, 0))
    assert sub.shape == (2, 1)
    assert sub == Grid(([0.5, 1.0], [1.0]))
    assert len(list(grid.indices())) == 6


@pytest.mark.parametrize("nodes", [([0.0, 0.0],), ([1.0, 0.5],), ([0.0, 1.0, 1.0],)])
def test_grid_rejects_bad_nodes(nodes):
    with pytest.raises(CoincidentNodesError):
        Grid(nodes)


def test_check_distinct_names_pair():
    with pytest.raises(CoincidentNodesError) as info:
        check_distinct([0.3, 0.1, 0.3])
    assert info.value.pair == (0.3, 0.3)
    check_distinct([0.3])


def test_shape_mismatch():
    with pytest.raises(DimensionError):
        divided_difference(np.zeros((2, 2)), Grid(([0.0, 1.0],)))


def test_g_dd_of_squares_in_y():
    p = ExprGProvider("x1^2 + x2^2 + y^2 - 1", 2)
    # first order in y of y^2 is y0 + y1
    assert g_divided_difference(p, [[0.1], [0.2]], [0.5, 0.7]) == pytest.approx(1.2)
    assert g_divided_difference(p, [[0.1], [0.2]], [0.1, 0.9, 0.4]) == pytest.approx(1.0)
    # separable sum: mixed differences vanish
    assert g_divided_difference(p, [[0.1, 0.4], [0.2]], [0.5, 0.7]) == pytest.approx(0.0, abs=1e-14)


def test_unsorted_y_nodes_are_allowed():
    p = ExprGProvider("y^3 + x1", 1)
    a = g_divided_difference(p, [[0.0]], [0.1, 0.5, 0.3])
    b = g_divided_difference(p, [[0.0]], [0.1, 0.3, 0.5])
    assert a == pytest.approx(b, rel=1e-14)
    assert a == pytest.approx(0.1 + 0.3 + 0.5)


def test_coincident_y_nodes():
    p = ExprGProvider("y^3 + x1", 1)
    with pytest.raises(CoincidentNodesError):
        g_divided_difference(p, [[0.0]], [0.1, 0.5, 0.1])


def test_g_tensor_dd_matches_provider():
    p = ExprGProvider("sin(x1*y) + x1^2*y", 1)
    xs, ys = [0.1, 0.4], [0.2, 0.6, 0.9]
    values = np.array([[p.sample((x,), y) for y in ys] for x in xs])
    assert g_tensor_dd(values, [xs], ys) == pytest.approx(g_divided_difference(p, [xs], ys), rel=1e-14)


axis_nodes = st.lists(st.floats(-2, 2), min_size=1, max_size=4, unique=True).map(sorted).filter(
    lambda v: len(v) < 2 or min(np.diff(v)) > 0.05
)


@given(st.tuples(axis_nodes, axis_nodes, axis_nodes))
def test_axis_order_independence(nodes):
    grid = Grid(nodes)
    values = grid.sample(lambda p: math.exp(0.3 * p[0]) * math.cos(p[1] - p[2]) + p[0] * p[1] ** 2)
    ref = divided_difference(values, grid)
    for order in [(0, 1, 2), (1, 0, 2), (2, 0, 1)]:
        assert math.isclose(divided_difference(values, grid, order), ref, rel_tol=1e-10, abs_tol=1e-10)


@given(st.tuples(axis_nodes, axis_nodes), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_affine_functions_have_vanishing_higher_differences(nodes, a, b, c):
    grid = Grid(nodes)
    values = grid.sample(lambda p: a + b * p[0] + c * p[1])
    if sum(grid.shape) - 2 >= 2:
        assert abs(divided_difference(values, grid)) <= 1e-10


def test_bad_axis_order():
    grid = Grid(([0.0, 1.0], [0.0, 1.0]))
    with pytest.raises(ValueError):
        divided_difference(np.ones((2, 2)), grid, (0, 0))


def test_shrinking_grid_converges_to_scaled_partial():
    e = parse("exp(x1)*sin(x2)", 2)
    f = lambda p: evaluate(e, (p[0], p[1], 0.0))
    x0 = (0.3, 0.4)
    n = (2, 1)
    target = evaluate(diff_multi(e, (0, 2, 1)), x0 + (0.0,)) / coalesced_dd_to_partial(n)
    errors = []
    for h in (1e-2, 1e-3):
        grid = Grid(tuple([c + i * h for i in range(m + 1)] for c, m in zip(x0, n)))
        errors.append(abs(divided_difference(grid.sample(f), grid) - target))
    assert 8 <= errors[0] / errors[1] <= 12.5


def test_coalesced_factor():
    assert coalesced_dd_to_partial((2, 1)) == 2
    assert coalesced_dd_to_partial((2, 1), 3) == 12
    with pytest.raises(ValueError):
        coalesced_dd_to_partial((1,), -1)


def test_provider_partials_and_dimension_checks():
    p = ExprGProvider("x1^2*y^3", 1)
    assert p.partial((1,), 2, (2.0,), 0.5) == pytest.approx(2 * 2.0 * 6 * 0.5)
    with pytest.raises(DimensionError):
        p.sample((1.0, 2.0), 0.0)
    with pytest.raises(DimensionError):
        p.partial_expr((1, 0), 0)


def test_extended_precision_provider():
    p = ExprGProvider("y^3 + x1", 1, dps=40)
    assert isinstance(p.sample((0.5,), 0.25), mpmath.mpf)
    ys = [0.5, 0.5 + 1e-6, 0.5 + 2e-6]
    exact = sum(ys)  # second difference of y^3 is the node sum
    fast = g_divided_difference(ExprGProvider("y^3 + x1", 1), [[0.5]], ys)
    slow = g_divided_difference(p, [[0.5]], ys)
    assert isinstance(slow, float)
    assert abs(slow - exact) <= 1e-14
    assert abs(fast - exact) > abs(slow - exact)
