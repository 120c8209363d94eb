"""Divided differences on shrinking grids approach scaled partial derivatives.

On the grid x0 + j*h the divided difference of order n tends to y_n(x0) / n!
with error O(h).  The table shows the relative error for the sphere case in
double precision, and in 40-digit arithmetic where roundoff no longer masks
the linear decay at small h.
"""
from implicitdd import Grid, derivative_corollary, get_case, main_theorem_polygon, make_problem
from implicitdd.mindex import MultiIndex

case = get_case("sphere")
x0 = (0.3, 0.2)
y0 = case.solve(x0)

print(f"{'n':>8} {'h':>7} {'double':>10} {'40 digits':>10}")
for n in [MultiIndex((2, 0)), MultiIndex((1, 1)), MultiIndex((2, 1)), MultiIndex((0, 3))]:
    exact = derivative_corollary(case.provider, x0, y0, n)
    for h in (1e-2, 1e-3, 1e-4):
        grid = Grid(tuple([c + j * h for j in range(m + 1)] for c, m in zip(x0, n)))
        errs = []
        for dps in (None, 40):
            v = n.factorial() * main_theorem_polygon(make_problem(case, grid, dps=dps), n)
            errs.append(abs(v - exact) / abs(exact))
        print(f"{str(tuple(n)):>8} {h:7.0e} {errs[0]:10.2e} {errs[1]:10.2e}")
