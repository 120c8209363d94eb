"""Divided differences of the upper unit hemisphere from g alone.

y(x1, x2) = sqrt(1 - x1^2 - x2^2) is defined implicitly by
g = x1^2 + x2^2 + y^2 - 1.  On a random 3 x 2 grid we evaluate [x: 0, (2,1)]y
three ways from divided differences of g and compare with the divided
difference of the solved y-values.
"""
import numpy as np

from implicitdd import (
    direct_dd_y,
    emit_terms,
    get_case,
    main_theorem_polygon,
    main_theorem_tree,
    make_problem,
    random_grid,
    r2prime,
)

case = get_case("sphere")
n = (2, 1)
grid = random_grid(case, n, np.random.default_rng(1))
print("grid nodes:")
for j, axis in enumerate(grid.nodes, 1):
    print(f"  x{j}: {np.round(axis, 4).tolist()}")

problem = make_problem(case, grid)
reference = direct_dd_y(case, grid)
for name, f in [("recursion", r2prime), ("polygons", main_theorem_polygon), ("trees", main_theorem_tree)]:
    v = f(problem, n)
    print(f"{name:>10}: {v:.15f}   deviation from solved y: {abs(v - reference):.1e}")

terms = emit_terms(n, "tree")
print(f"\nthe tree expansion has {len(terms)} terms; the first three are")
for t in terms[:3]:
    print("  " + t.format())
