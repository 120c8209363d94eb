"""Partial derivatives of an implicit function as formulas in partials of g.

Prints y_n for |n| <= 2 in terms of g_{s,t}, then evaluates the third-order
formula for x1*y^2 + x2*y = 1 and compares it with differentiating the
closed-form root.
"""
from implicitdd import derivative_corollary, enumerate_deriv_partitions, exact_derivative_y, get_case, symbolic_formula

for n in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
    print(f"y{n[0]}{n[1]} = {symbolic_formula(n)}")

print()
for n in [(3, 0), (2, 1)]:
    print(f"n = {n}: {len(enumerate_deriv_partitions(n))} terms")

case = get_case("quadratic")
x = (0.9, 1.1)
y = case.solve(x)
for n in [(3, 0), (2, 1), (1, 2)]:
    a = derivative_corollary(case.provider, x, y, n)
    b = exact_derivative_y(case, x, n)
    print(f"y_{n} at {x}: from g {a:.12f}, from the closed form {b:.12f}")
