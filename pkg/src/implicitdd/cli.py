"""Command-line interface: ``implicitdd {divdiff,derivative,enumerate,verify}``.

Results go to stdout, diagnostics to stderr.  Exit status: 0 success,
1 bad input (parse errors, invalid arguments, failed verification),
2 singular configuration, 3 root-finding failure.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np
import yaml

from .ddcore import ExprGProvider, Grid, divided_difference
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
from .exprsym import parse
from .hideriv import derivative_corollary, enumerate_deriv_partitions, format_partial, symbolic_formula
from .implicit import (
    ImplicitProblem,
    emit_curly_terms,
    emit_terms,
    main_theorem_polygon,
    main_theorem_tree,
    r1,
    r2prime,
)
from .mindex import (
    LatticePath,
    MultiIndex,
    compatible_tuples,
    enumerate_increasing_paths,
    enumerate_unit_paths,
    format_mindex,
    unit_axis,
    zero,
)
from .oracle import CATALOG, TestCase, get_case, random_grid, solve_grid
from .polytree import as_vertices, enumerate_partitions, enumerate_tprime, enumerate_trees
from .verify import SUITES

EXIT_INPUT = 1
EXIT_SINGULAR = 2
EXIT_SOLVER = 3

PROBLEM_VERSION = 1


class InputError(ValueError):
    """Malformed command-line arguments or problem file."""


# --------------------------------------------------------------------------
# parsing helpers


def parse_mindex(text: str) -> MultiIndex:
    """``"2,1"`` or ``"(2,1)"`` to a multi-index."""
    body = text.strip().strip("()")
    try:
        return MultiIndex(int(v) for v in body.split(",") if v.strip())
    except ValueError as exc:
        raise InputError(f"bad multi-index {text!r}: {exc}") from None


def parse_point(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.strip().strip("()").split(","))
    except ValueError:
        raise InputError(f"bad point {text!r}") from None


def parse_path(text: str) -> tuple[MultiIndex, ...]:
    """``"(0,0) (1,0) (2,0)"`` to a tuple of multi-indices."""
    groups = re.findall(r"\(([^()]*)\)", text)
    if not groups:
        raise InputError(f"bad path {text!r}; expected e.g. \"(0,0) (1,0) (2,0)\"")
    pts = tuple(parse_mindex(g) for g in groups)
    try:
        LatticePath(pts)
    except (ValueError, DimensionError) as exc:
        raise InputError(str(exc)) from None
    return pts


def parse_grid(text: str) -> Grid:
    """``"0.1,0.2;0.1,0.3"``: axes separated by semicolons."""
    try:
        return Grid(tuple([float(v) for v in axis.split(",")] for axis in text.split(";")))
    except ValueError as exc:
        raise InputError(f"bad grid {text!r}: {exc}") from None


def load_problem_file(path: str | Path) -> dict:
    """Read and validate a problem file; returns a dict with keys
    ``case`` (TestCase or None), ``provider``, ``grid``, ``y`` (array or None) and ``n``."""
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise InputError(f"{path}: YAML error: {exc}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: expected a mapping at top level")
    if data.get("version") != PROBLEM_VERSION:
        raise InputError(f"{path}: unsupported or missing version (expected version: {PROBLEM_VERSION})")
    unknown = set(data) - {"version", "q", "g", "grid", "y", "n", "closed_form"}
    if unknown:
        raise InputError(f"{path}: unknown keys {sorted(unknown)}")
    for key in ("q", "g", "grid", "y"):
        if key not in data:
            raise InputError(f"{path}: missing key {key!r}")
    q = data["q"]
    if not isinstance(q, int) or q < 1:
        raise InputError(f"{path}: q must be a positive integer")
    g = parse(str(data["g"]), q)
    axes = data["grid"]
    if not isinstance(axes, list) or len(axes) != q:
        raise InputError(f"{path}: grid must list {q} axes of nodes")
    grid = Grid(tuple(np.asarray(a, dtype=float) for a in axes))
    n = MultiIndex(data["n"]) if "n" in data else grid.order
    ydef = data["y"]
    if not isinstance(ydef, dict) or len(ydef) != 1 or not set(ydef) <= {"solve", "values"}:
        raise InputError(f"{path}: y must be {{solve: {{bracket|guess}}}} or {{values: nested list}}")
    case = None
    values = None
    if "solve" in ydef:
        opts = ydef["solve"] or {}
        if not set(opts) <= {"bracket", "guess"} or not opts:
            raise InputError(f"{path}: y.solve takes 'bracket' and/or 'guess'")
        case = TestCase(
            Path(path).stem,
            q,
            g,
            tuple((float(a[0]), float(a[-1])) for a in grid.nodes),
            None if "bracket" not in opts else tuple(float(v) for v in opts["bracket"]),
            None if "guess" not in opts else float(opts["guess"]),
            None if "closed_form" not in data else parse(str(data["closed_form"]), q),
        )
        provider = case.provider
    else:
        values = np.asarray(ydef["values"], dtype=float)
        if values.shape != grid.shape:
            raise InputError(f"{path}: y.values has shape {values.shape}, grid has shape {grid.shape}")
        provider = ExprGProvider(g, q)
    return {"case": case, "provider": provider, "grid": grid, "y": values, "n": n}


# --------------------------------------------------------------------------
# output


class Printer:
    def __init__(self, fmt: str):
        self.fmt = fmt

    def value(self, label: str, value, **extra):
        if self.fmt == "machine":
            print(json.dumps({"kind": label, "value": value, **extra}, sort_keys=True))
        else:
            if isinstance(value, float):
                value = repr(value)
            print(f"{label}: {value}" if label else value)

    def line(self, kind: str, text: str):
        if self.fmt == "machine":
            print(json.dumps({"kind": kind, "text": text}, sort_keys=True))
        else:
            print(text)


# --------------------------------------------------------------------------
# commands


def _problem_from_args(args, need_n: bool = True):
    """(problem, case-or-None, y-values-or-None, n) from --problem / --case."""
    if args.problem:
        spec = load_problem_file(args.problem)
        n = args.n or spec["n"]
        grid = spec["grid"]
        if spec["y"] is None:
            y = solve_grid(spec["case"], grid)
        else:
            y = spec["y"]
        return ImplicitProblem(spec["provider"], grid, y), spec["case"], spec["y"], n
    if not args.case:
        raise InputError("give a problem file or --case NAME")
    case = get_case(args.case)
    if args.grid:
        grid = parse_grid(args.grid)
        n = args.n or grid.order
    else:
        if args.n is None:
            raise InputError("--n is required with --case unless --grid is given")
        n = args.n
        grid = random_grid(case, n, args.seed)
    return ImplicitProblem(case.provider, grid, solve_grid(case, grid)), case, None, n


def _sub_box(problem: ImplicitProblem, n: MultiIndex):
    idx = [slice(0, k + 1) for k in n]
    return problem.y_values[tuple(idx)], problem.grid.sub(zero(n.q), n)


def _evaluate(method: str, problem: ImplicitProblem, n: MultiIndex) -> float:
    if method == "oracle":
        values, sub = _sub_box(problem, n)
        return divided_difference(values, sub)
    if n.order == 1:
        return r1(problem, zero(n.q), unit_axis(n))
    return {"recursive": r2prime, "polygon": main_theorem_polygon, "tree": main_theorem_tree}[method](problem, n)


def cmd_divdiff(args, out: Printer) -> int:
    problem, _, _, n = _problem_from_args(args)
    if n.order < 1:
        raise InputError("|n| >= 1 required")
    if n.q != problem.q:
        raise InputError(f"n has q={n.q}, problem has q={problem.q}")
    problem.check_box(zero(n.q), n)
    methods = ["recursive", "polygon", "tree", "oracle"] if args.all else [args.method]
    values = {}
    for m in methods:
        values[m] = _evaluate(m, problem, n)
        out.value(m, values[m], n=list(n))
    if args.all:
        vals = list(values.values())
        dev = max(abs(a - b) / max(1.0, abs(a), abs(b)) for a in vals for b in vals)
        out.value("max deviation", dev)
    if args.terms:
        if args.mode == "curly":
            terms = [t.format(args.style) for t in emit_curly_terms(n)] if n.order > 1 else []
        else:
            terms = [t.format(args.style) for t in emit_terms(n, args.mode)]
        for t in terms:
            out.line("term", t)
    return 0


def cmd_derivative(args, out: Printer) -> int:
    if args.symbolic:
        if args.n is None:
            raise InputError("--n is required")
        name = "y" + format_partial(tuple(args.n)[:-1], args.n[-1])[1:]
        out.line("formula", f"{name} = {symbolic_formula(args.n)}")
        return 0
    if args.n is None or args.point is None:
        raise InputError("--n and --point are required")
    if args.problem:
        spec = load_problem_file(args.problem)
        case, provider = spec["case"], spec["provider"]
    elif args.case:
        case = get_case(args.case)
        provider = case.provider
    else:
        raise InputError("give a problem file or --case NAME")
    x = args.point
    if len(x) != provider.q:
        raise InputError(f"point has {len(x)} coordinates, expected q={provider.q}")
    if args.y is not None:
        y = args.y
    elif case is not None:
        y = case.solve(x)
    else:
        raise InputError("--y is required when the problem file lists y-values")
    out.value("y", y)
    out.value("derivative", derivative_corollary(provider, x, y, args.n), n=list(args.n))
    return 0


def _vertices_from_args(args):
    if args.path:
        return parse_path(args.path)
    if args.vertices is not None:
        if args.vertices < 2:
            raise InputError("--vertices must be at least 2")
        return as_vertices(args.vertices)
    raise InputError("give --path or --vertices")


def cmd_enumerate(args, out: Printer) -> int:
    kind = args.kind
    style = args.style
    if kind == "paths":
        if args.n is None:
            raise InputError("--n is required")
        start = zero(args.n.q)
        paths = enumerate_unit_paths(start, args.n) if args.k is None else enumerate_increasing_paths(start, args.n, args.k)
        items = [" ".join(format_mindex(p, style) for p in path.points) for path in paths]
    elif kind == "partitions":
        items = [p.to_text() for p in enumerate_partitions(_vertices_from_args(args))]
    elif kind == "trees":
        items = [t.to_text() for t in enumerate_trees(_vertices_from_args(args))]
    elif kind == "tprime":
        items = [t.to_text() for t in enumerate_tprime(_vertices_from_args(args))]
    elif kind == "tuples":
        if not args.path:
            raise InputError("--path is required")
        items = ["(" + ",".join(map(str, c.as_tuple())) + ")" for c in compatible_tuples(parse_path(args.path))]
    elif kind == "derivparts":
        if args.n is None:
            raise InputError("--n is required")
        items = [str(p) for p in enumerate_deriv_partitions(args.n)]
    else:  # pragma: no cover - argparse restricts choices
        raise InputError(f"unknown kind {kind!r}")
    if not args.count:
        for item in items:
            out.line(kind, item)
    out.value("count", len(items))
    return 0


def cmd_verify(args, out: Printer) -> int:
    suite = SUITES[args.suite]
    kwargs = {}
    if args.suite in ("equivalence", "oracle", "coefficients"):
        kwargs["seed"] = args.seed
        kwargs["max_order"] = args.max_order
    if args.suite in ("equivalence", "oracle"):
        kwargs["n_grids"] = args.grids
    checks = suite(**kwargs)
    for c in checks:
        if out.fmt == "machine":
            print(json.dumps({"kind": "check", "name": c.name, "passed": c.passed, "deviation": c.deviation,
                              "tolerance": c.tolerance, "detail": c.detail}, sort_keys=True))
        else:
            print(c.line())
    ok = all(c.passed for c in checks)
    out.value("result", "pass" if ok else "fail")
    return 0 if ok else EXIT_INPUT


# --------------------------------------------------------------------------


def _mindex_arg(text):
    try:
        return parse_mindex(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _point_arg(text):
    try:
        return parse_point(text)
    except InputError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="implicitdd",
        description="Divided differences and derivatives of implicit functions from those of g.",
    )
    parser.add_argument("--format", choices=["text", "machine"], default="text",
                        help="machine: one JSON record per line")
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p):
        p.add_argument("problem", nargs="?", help="YAML problem file (version: 1)")
        p.add_argument("--case", choices=sorted(CATALOG), help="built-in test case instead of a file")

    p = sub.add_parser("divdiff", help="evaluate [x: 0, n]y")
    source(p)
    p.add_argument("--n", type=_mindex_arg, help="order, e.g. 2,1 (default: the whole grid)")
    p.add_argument("--grid", help="grid for --case, axes separated by ';', e.g. '0.1,0.2;0.1,0.3'")
    p.add_argument("--seed", type=int, default=0, help="seed for the random grid of --case")
    p.add_argument("--method", choices=["recursive", "polygon", "tree", "oracle"], default="recursive")
    p.add_argument("--all", action="store_true", help="all four methods and their max deviation")
    p.add_argument("--terms", action="store_true", help="also print the symbolic terms")
    p.add_argument("--mode", choices=["polygon", "tree", "curly"], default="tree", help="term expansion")
    p.add_argument("--style", choices=["basis", "tuple"], default="basis", help="multi-index notation")
    p.set_defaults(func=cmd_divdiff)

    p = sub.add_parser("derivative", help="partial derivative y_n at a point")
    source(p)
    p.add_argument("--n", type=_mindex_arg)
    p.add_argument("--point", type=_point_arg, help="x, e.g. 0.3,0.4")
    p.add_argument("--y", type=float, help="y at the point (default: solve)")
    p.add_argument("--symbolic", action="store_true", help="print the formula in partials of g")
    p.set_defaults(func=cmd_derivative)

    p = sub.add_parser("enumerate", help="list combinatorial structures")
    p.add_argument("kind", choices=["paths", "partitions", "trees", "tprime", "tuples", "derivparts"])
    p.add_argument("--n", type=_mindex_arg)
    p.add_argument("--k", type=int, help="paths: number of steps (default: unit steps)")
    p.add_argument("--vertices", type=int, help="polygon vertex count (one-dimensional labels)")
    p.add_argument("--path", help="lattice path, e.g. \"(0,0) (1,0) (2,0)\"")
    p.add_argument("--style", choices=["basis", "tuple"], default="tuple")
    p.add_argument("--count", action="store_true", help="print only the count")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-order", type=int, default=4)
    p.add_argument("--grids", type=int, default=20, help="random grids per order")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Printer(args.format)
    try:
        return args.func(args, out)
    except (SingularConfigurationError, CoincidentNodesError) as exc:
        print(f"error: singular configuration: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except SolverError as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, ExprError, DimensionError, InconsistentPointError, DomainError, ImplicitDDError,
            KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
