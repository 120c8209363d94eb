"""Ground truth for the implicit-function formulas.

Solves g(x, y) = 0 for y at every grid point, takes divided differences of the
solved samples directly, and differentiates closed-form solutions
symbolically.  None of this uses the g-only formulas, so it serves as an
independent check on them.

Built-in cases
--------------
=========  ==============================  ==================  =========
name       g                               domain              q
=========  ==============================  ==================  =========
product    y - x1*x2                       (0.5, 1.5)^2        2
sphere     x1^2 + x2^2 + y^2 - 1           (0, 0.6)^2          2
quadratic  x1*y^2 + x2*y - 1               (0.5, 1.5)^2        2
expgraph   y - exp(x1 + x2)                (0, 1)^2            2
linear     y - 2*x1 + 3*x2 - 1             (0, 1)^2            2
sphere3    x1^2 + x2^2 + x3^2 + y^2 - 1    (0, 0.5)^3          3
=========  ==============================  ==================  =========
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from scipy.optimize import root_scalar

from .ddcore import ExprGProvider, Grid, divided_difference
from .errors import SolverError
from .exprsym import Expr, compile_expr, diff, diff_multi, evaluate, parse
from .implicit import ImplicitProblem
from .mindex import MultiIndex

__all__ = [
    "TestCase",
    "CATALOG",
    "get_case",
    "solve_y",
    "solve_grid",
    "direct_dd_y",
    "closed_form_dd_y",
    "exact_derivative_y",
    "make_problem",
    "polish_y",
    "random_grid",
    "random_point",
    "check_closed_form",
]

NEWTON_MAXITER = 50
NEWTON_TOL = 1e-14
RESIDUAL_RTOL = 1e-13
MIN_SEPARATION = 0.05
Y_SEPARATION = 1e-8


@dataclass(frozen=True)
class TestCase:
    """An implicit equation g(x, y) = 0 together with how to solve it.

    ``bracket`` selects the branch of solutions; without one, Newton starts
    from ``guess``.  ``closed_form`` is y as an expression in x1..xq.
    """

    __test__ = False  # not a pytest class

    name: str
    q: int
    g: Expr
    domain: tuple[tuple[float, float], ...]
    bracket: tuple[float, float] | None = None
    guess: float | None = None
    closed_form: Expr | None = None
    provider: ExprGProvider = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.domain) != self.q:
            raise ValueError(f"domain has {len(self.domain)} axes, expected q={self.q}")
        if self.bracket is None and self.guess is None:
            raise ValueError("a test case needs a bracket or an initial guess")
        object.__setattr__(self, "provider", ExprGProvider(self.g, self.q))

    @classmethod
    def from_text(cls, name, q, g, domain, bracket=None, guess=None, closed_form=None) -> TestCase:
        return cls(
            name,
            q,
            parse(g, q),
            tuple((float(a), float(b)) for a, b in domain),
            None if bracket is None else (float(bracket[0]), float(bracket[1])),
            None if guess is None else float(guess),
            None if closed_form is None else parse(closed_form, q),
        )

    def solve(self, x: Sequence[float]) -> float:
        return solve_y(self.g, x, bracket=self.bracket, guess=self.guess)

    def y_exact(self, x: Sequence[float]) -> float:
        if self.closed_form is None:
            raise ValueError(f"case {self.name!r} has no closed form")
        return evaluate(self.closed_form, tuple(x) + (0.0,))


def _catalog() -> dict[str, TestCase]:
    cases = [
        TestCase.from_text("product", 2, "y - x1*x2", [(0.5, 1.5)] * 2, (0, 3), closed_form="x1*x2"),
        TestCase.from_text(
            "sphere", 2, "x1^2 + x2^2 + y^2 - 1", [(0, 0.6)] * 2, (0, 1.5), closed_form="sqrt(1 - x1^2 - x2^2)"
        ),
        TestCase.from_text(
            "quadratic",
            2,
            "x1*y^2 + x2*y - 1",
            [(0.5, 1.5)] * 2,
            (0, 2),
            closed_form="(sqrt(x2^2 + 4*x1) - x2)/(2*x1)",
        ),
        TestCase.from_text("expgraph", 2, "y - exp(x1 + x2)", [(0, 1)] * 2, (0, 10), 1.0, "exp(x1 + x2)"),
        TestCase.from_text("linear", 2, "y - 2*x1 + 3*x2 - 1", [(0, 1)] * 2, (-5, 5), closed_form="2*x1 - 3*x2 + 1"),
        TestCase.from_text(
            "sphere3",
            3,
            "x1^2 + x2^2 + x3^2 + y^2 - 1",
            [(0, 0.5)] * 3,
            (0, 1.5),
            closed_form="sqrt(1 - x1^2 - x2^2 - x3^2)",
        ),
    ]
    return {c.name: c for c in cases}


CATALOG: dict[str, TestCase] = _catalog()


def get_case(name: str) -> TestCase:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown case {name!r}; available: {', '.join(CATALOG)}") from None


def solve_y(g: Expr, x: Sequence[float], bracket: tuple[float, float] | None = None, guess: float | None = None) -> float:
    """Solve g(x, y) = 0 for y.

    Newton's method (at most 50 iterations, step tolerance 1e-14) starts from
    ``guess`` or the bracket midpoint.  If it fails or leaves the bracket,
    a bracketing solver takes over; that requires a sign change of g on the
    bracket.  The root is accepted when |g| <= 1e-13 * max(1, |y g_y|).
    """
    x = tuple(float(v) for v in x)
    f = compile_expr(g)
    fy = compile_expr(diff(g, 0))

    def func(y):
        return f(y, *x)

    def fprime(y):
        return fy(y, *x)

    if bracket is not None:
        lo, hi = float(bracket[0]), float(bracket[1])
        if not lo < hi:
            raise ValueError(f"bad bracket {bracket!r}")
    x0 = guess if guess is not None else (0.5 * (lo + hi) if bracket is not None else None)
    if x0 is None:
        raise ValueError("need a bracket or an initial guess")

    y = None
    try:
        with warnings.catch_warnings():
            # a vanishing derivative is handled by the fallback below
            warnings.simplefilter("ignore", RuntimeWarning)
            res = root_scalar(func, fprime=fprime, x0=x0, method="newton", xtol=NEWTON_TOL, maxiter=NEWTON_MAXITER)
        if res.converged and math.isfinite(res.root):
            y = float(res.root)
    except (ArithmeticError, ValueError, RuntimeError):
        y = None
    if y is not None and bracket is not None and not lo <= y <= hi:
        y = None
    if y is None:
        if bracket is None:
            raise SolverError(f"Newton's method failed from y = {x0!r} at x = {x}")
        flo, fhi = func(lo), func(hi)
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if np.sign(flo) == np.sign(fhi):
            raise SolverError(f"Newton's method failed and g has no sign change on {bracket!r} at x = {x}")
        res = root_scalar(func, bracket=(lo, hi), method="brentq", xtol=1e-300, rtol=4 * np.finfo(float).eps)
        y = float(res.root)
    scale = max(1.0, abs(y * fprime(y)))
    if not abs(func(y)) <= RESIDUAL_RTOL * scale:
        raise SolverError(f"residual |g| = {abs(func(y)):.3g} too large at x = {x}, y = {y!r}")
    return y


def solve_grid(case: TestCase, grid: Grid) -> np.ndarray:
    """Solved y at every grid point, as an array shaped like the grid."""
    if grid.q != case.q:
        raise ValueError(f"grid has q={grid.q}, case {case.name!r} has q={case.q}")
    return grid.sample(case.solve)


def direct_dd_y(case: TestCase, grid: Grid) -> float:
    """Divided difference of y over the whole grid, from solved samples."""
    return divided_difference(solve_grid(case, grid), grid)


def closed_form_dd_y(case: TestCase, grid: Grid) -> float:
    """Divided difference of the closed-form y over the whole grid."""
    return divided_difference(grid.sample(case.y_exact), grid)


def exact_derivative_y(case: TestCase, x: Sequence[float], n) -> float:
    """The mixed partial y_n(x) by symbolic differentiation of the closed form."""
    if case.closed_form is None:
        raise ValueError(f"case {case.name!r} has no closed form")
    n = MultiIndex(n)
    if n.q != case.q:
        raise ValueError(f"n has q={n.q}, case has q={case.q}")
    return evaluate(diff_multi(case.closed_form, (0,) + tuple(n)), tuple(x) + (0.0,))


def polish_y(case: TestCase, x: Sequence[float], y0: float, dps: int):
    """Refine a root to ``dps`` decimal digits with mpmath; returns an mpf."""
    f = compile_expr(case.g, "mpmath")
    with mpmath.workdps(dps):
        xs = [mpmath.mpf(v) for v in x]
        return mpmath.findroot(lambda y: f(y, *xs), mpmath.mpf(y0))


def make_problem(case: TestCase, grid: Grid, dps: int | None = None) -> ImplicitProblem:
    """The implicit problem on ``grid`` with solved y-values.

    With ``dps`` set, y-values are refined to that many digits and g is
    sampled in mpmath, so divided differences of g carry no float roundoff.
    """
    y = solve_grid(case, grid)
    if dps is None:
        return ImplicitProblem(case.provider, grid, y)
    exact = np.empty(grid.shape, dtype=object)
    for idx in np.ndindex(grid.shape):
        exact[idx] = polish_y(case, grid.point(idx), y[idx], dps)
    return ImplicitProblem(ExprGProvider(case.g, case.q, dps=dps), grid, exact)


def _draw_axis(rng, lo, hi, m, max_tries=1000):
    span = hi - lo
    for _ in range(max_tries):
        nodes = np.sort(rng.uniform(lo, hi, m))
        if m < 2 or np.min(np.diff(nodes)) >= MIN_SEPARATION * span:
            return nodes
    raise RuntimeError(f"could not place {m} separated nodes on ({lo}, {hi})")


def random_grid(case: TestCase, n, rng: np.random.Generator | int | None = None, max_tries: int = 100) -> Grid:
    """A random grid of order n inside the case's domain.

    Nodes are uniform, sorted and at least 0.05 * span apart on every axis;
    grids where two points have y-values closer than 1e-8 are re-drawn.
    """
    rng = np.random.default_rng(rng)
    n = MultiIndex(n)
    if n.q != case.q:
        raise ValueError(f"n has q={n.q}, case has q={case.q}")
    for _ in range(max_tries):
        grid = Grid(tuple(_draw_axis(rng, lo, hi, m + 1) for (lo, hi), m in zip(case.domain, n)))
        y = np.sort(solve_grid(case, grid).ravel())
        if y.size < 2 or np.min(np.diff(y)) >= Y_SEPARATION:
            return grid
    raise RuntimeError(f"no grid with distinct y-values found for case {case.name!r}")


def random_point(case: TestCase, rng: np.random.Generator | int | None = None, margin: float = 0.1) -> tuple[float, ...]:
    """A uniform point in the case's domain, kept ``margin * span`` from the edges."""
    rng = np.random.default_rng(rng)
    return tuple(float(rng.uniform(lo + margin * (hi - lo), hi - margin * (hi - lo))) for lo, hi in case.domain)


def check_closed_form(case: TestCase, rng=None, m: int = 10, tol: float = 1e-10) -> float:
    """Largest |g(x, y(x))| over m random points; raises if it exceeds tol."""
    rng = np.random.default_rng(rng)
    worst = 0.0
    for _ in range(m):
        x = random_point(case, rng, margin=0.0)
        worst = max(worst, abs(case.provider.sample(x, case.y_exact(x))))
    if worst >= tol:
        raise AssertionError(f"closed form of {case.name!r} leaves residual {worst:.3g}")
    return worst
