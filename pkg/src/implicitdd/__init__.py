"""Divided differences and higher derivatives of implicit functions.

Given g(x1, ..., xq, y) = 0 defining y = y(x) locally, this package expresses
divided differences of y over a rectangular grid, and partial derivatives of
y at a point, entirely in terms of divided differences (respectively partial
derivatives) of g.
"""
from .ddcore import ExprGProvider, Grid, divided_difference, g_divided_difference
from .errors import (
    CoincidentNodesError,
    DimensionError,
    DomainError,
    ExprError,
    ImplicitDDError,
    InconsistentPointError,
    SingularConfigurationError,
    SolverError,
)
from .exprsym import diff, evaluate, parse, to_source
from .hideriv import (
    coalesced_tree_form,
    derivative_corollary,
    enumerate_deriv_partitions,
    partition_coefficient,
    symbolic_formula,
)
from .implicit import (
    ImplicitProblem,
    curly_bracket,
    emit_terms,
    main_theorem_polygon,
    main_theorem_tree,
    r1,
    r2prime,
)
from .mindex import LatticePath, MultiIndex, compatible_tuples, enumerate_unit_paths
from .oracle import CATALOG, direct_dd_y, exact_derivative_y, get_case, make_problem, random_grid, solve_y
from .polytree import PlaneTree, PolygonPartition, enumerate_partitions, enumerate_tprime, enumerate_trees

__version__ = "0.1.0"
