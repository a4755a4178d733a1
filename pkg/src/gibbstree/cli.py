"""Command-line front end.

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure,
3 verification failure.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import DivergenceError, DomainError, GibbsTreeError, InvalidLawError, NumericalFailure
from .model import BoundaryFunction, ModelParams, theta_critical
from .operator import (
    DEFAULT_RESOLUTION,
    apply_hammerstein,
    build_grid,
    fixed_point_residual,
    iterate_hammerstein,
    moment_integral,
    project_rank2,
    quadrature_moment,
    sample_boundary,
)
from .phase import CSV_HEADER, row_to_csv, scan_theta
from .reduced import (
    FixedPointKind,
    alt_sum_identity,
    enumerate_fixed_points,
    poly_coeffs,
    positivity_bound,
    theta_threshold,
    v_residual,
)
from .sampler import TreeSpec, derived_stream, order_param_estimate, sample_configuration

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _g17(x):
    return format(x, ".17g")


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _params(args, theta=None):
    return ModelParams(args.k, args.n, args.theta if theta is None else theta)


def _boundary(params, branch):
    if branch == "unit":
        return BoundaryFunction(1.0, 0.0)
    kinds = {"plus": FixedPointKind.branch_pp, "minus": FixedPointKind.branch_pm}
    for p in enumerate_fixed_points(params):
        if p.kind is kinds[branch]:
            return BoundaryFunction(p.x, p.y)
    raise InvalidLawError(
        f"branch {branch!r} exists only for theta > theta_c = {params.theta_c:.17g} (got theta = {params.theta!r})"
    )


def cmd_thresholds(args):
    theta_c, reachable = theta_critical(args.k, args.n)
    thresholds = {str(i): theta_threshold(args.k, args.n, i) for i in range(1, args.k + 1, 2)}
    if args.format == "csv":
        lines = ["i,theta_threshold"] + [f"{i},{_g17(v)}" for i, v in thresholds.items()]
        return "\n".join(lines) + "\n", EXIT_OK
    return _json({"theta_c": theta_c, "reachable": bool(reachable), "thresholds": thresholds}), EXIT_OK


def cmd_fixed_points(args):
    params = _params(args)
    points = enumerate_fixed_points(params, include_axis=args.include_axis)
    if args.format == "csv":
        lines = ["kind,x,y,positive_law,residual"]
        for p in points:
            res = v_residual(params, p.x, p.y)
            lines.append(f"{p.kind.value},{_g17(p.x)},{_g17(p.y)},{str(p.positive_law).lower()},{_g17(res)}")
        return "\n".join(lines) + "\n", EXIT_OK
    payload = {
        "k": params.k,
        "n": params.n,
        "theta": params.theta,
        "theta_c": params.theta_c,
        "fixed_points": [
            {
                "kind": p.kind.value,
                "x": p.x,
                "y": p.y,
                "positive_law": p.positive_law,
                "residual": v_residual(params, p.x, p.y),
            }
            for p in points
        ],
    }
    return _json(payload), EXIT_OK


def cmd_phase_diagram(args):
    ModelParams(args.k, args.n, args.theta_min)
    rows = scan_theta(args.k, args.n, args.theta_min, args.theta_max, args.steps, args.resolution)
    if args.format == "json":
        return _json([r.__dict__ for r in rows]), EXIT_OK
    return "\n".join([CSV_HEADER] + [row_to_csv(r) for r in rows]) + "\n", EXIT_OK


def _operator_report(params, resolution):
    grid = build_grid(params, resolution)
    fine = build_grid(params, 2 * resolution)
    laws = []
    ok = True
    for p in enumerate_fixed_points(params):
        if not p.positive_law:
            continue
        b = BoundaryFunction(p.x, p.y)
        r, r2 = fixed_point_residual(params, grid, b), fixed_point_residual(params, fine, b)
        good = r <= 1e-8
        ok = ok and good
        laws.append({"kind": p.kind.value, "residual": r, "residual_refined": r2, "pass": good})
    probe = apply_hammerstein(params, grid, grid.nodes)
    _, _, closure = project_rank2(params, grid, probe)
    small = build_grid(params, 8)
    f = 0.5 + small.nodes
    dense_gap = float(
        np.max(np.abs(apply_hammerstein(params, small, f).values - apply_hammerstein(params, small, f, dense=True).values))
    )
    ok = ok and closure <= 1e-9 and dense_gap <= 1e-13
    return {
        "k": params.k,
        "n": params.n,
        "theta": params.theta,
        "resolution": resolution,
        "laws": laws,
        "rank2_fit_error": closure,
        "dense_vs_separable": dense_gap,
        "pass": ok,
    }, ok


def cmd_operator_check(args):
    report, ok = _operator_report(_params(args), args.resolution)
    return _json(report), EXIT_OK if ok else EXIT_VERIFY


def cmd_sample(args):
    params = _params(args)
    b = _boundary(params, args.branch)
    if args.format == "csv":
        config = sample_configuration(params, b, args.depth, derived_stream(args.seed, 0))
        lines = ["vertex_index,depth,parent_index,spin"]
        lines += [f"{v},{d},{p},{_g17(s)}" for v, d, p, s in config.rows()]
        return "\n".join(lines) + "\n", EXIT_OK
    stats = order_param_estimate(params, b, args.depth, args.samples, seed=args.seed)
    return _json(stats.to_dict()), EXIT_OK


def _verify_identities(k_max, m_max):
    failures = []
    for k in range(1, k_max + 1):
        for m in range(1, m_max + 1, 2):
            lhs, rhs = alt_sum_identity(k, m)
            if lhs != rhs or not lhs > 0:
                failures.append(f"alt_sum_identity(k={k}, m={m}): {lhs} != {rhs}")
    for k in range(2, min(k_max, 8) + 1):
        for n in range(5):
            params = ModelParams(k, n, 0.5)
            grid = build_grid(params, DEFAULT_RESOLUTION)
            for i in range(k + 2):
                for shifted in (False, True):
                    gap = abs(moment_integral(params, i, shifted) - quadrature_moment(params, grid, i, shifted))
                    if gap > 1e-12:
                        failures.append(f"moment(k={k}, n={n}, i={i}, shifted={shifted}) off by {gap:g}")
    return failures


def _verify_reduced(k_max):
    failures = []
    for k in range(2, min(k_max, 8) + 1):
        odd = k % 2
        for n in range(5):
            for theta in np.linspace(0.0, 0.99, 20):
                params = ModelParams(k, n, float(theta))
                points = enumerate_fixed_points(params)
                above = params.theta > params.theta_c
                want = (7 if above else 3) if odd else (4 if above else 2)
                positive = sum(p.positive_law for p in points)
                if len(points) != want or positive != (3 if above else 1):
                    failures.append(f"{params}: {len(points)} points, {positive} positive")
                if above:
                    z0 = [params.theta * p.y / p.x for p in points if p.kind is FixedPointKind.branch_pp][0]
                    if not (z0 < positivity_bound(params) and poly_coeffs(params)(positivity_bound(params)) > 0):
                        failures.append(f"{params}: positivity criterion fails (z0={z0!r})")
    return failures


def _verify_operator(k_max, resolution):
    failures = []
    for k in range(2, min(k_max, 6) + 1):
        for n in range(4):
            for theta in (0.3, 0.9, 0.99):
                report, ok = _operator_report(ModelParams(k, n, theta), resolution)
                if not ok:
                    failures.append(f"operator check failed at k={k}, n={n}, theta={theta}")
    return failures


SUITES = ("identities", "reduced", "operator", "all")


def cmd_verify(args):
    suites = ("identities", "reduced", "operator") if args.suite == "all" else (args.suite,)
    results = {}
    for suite in suites:
        if suite == "identities":
            failures = _verify_identities(args.k_max, args.m_max)
        elif suite == "reduced":
            failures = _verify_reduced(args.k_max)
        else:
            failures = _verify_operator(args.k_max, args.resolution)
        results[suite] = {"pass": not failures, "failures": failures}
    ok = all(r["pass"] for r in results.values())
    return _json({"pass": ok, "suites": results}), EXIT_OK if ok else EXIT_VERIFY


def cmd_iterate(args):
    params = _params(args)
    b = _boundary(params, args.branch)
    grid = build_grid(params, args.resolution)
    f0 = sample_boundary(params, grid, b).values + args.perturbation * (grid.nodes - 0.5)
    code = EXIT_OK
    try:
        traj = iterate_hammerstein(params, grid, f0, args.steps, args.damping)
        diverged = False
    except DivergenceError as exc:
        traj, diverged, code = exc.trajectory, True, EXIT_NUMERIC
    payload = {
        "k": params.k,
        "n": params.n,
        "theta": params.theta,
        "branch": args.branch,
        "diverged": diverged,
        "trajectory": [{"step": i + 1, "c1": c1, "c2": c2, "residual": r} for i, (c1, c2, r) in enumerate(traj)],
    }
    if diverged:
        print(f"gibbstree iterate: diverged after {len(traj)} steps", file=sys.stderr)
    return _json(payload), code


def _add_model(p, theta=True):
    p.add_argument("--k", type=int, required=True, help="children per non-root vertex (>= 2)")
    p.add_argument("--n", type=int, required=True, help="odd-root order parameter (>= 0); m = 2n+1")
    if theta:
        p.add_argument("--theta", type=float, required=True, help="coupling in [0, 1)")


def _add_output(p, formats=("json", "csv"), default="json"):
    p.add_argument("--format", choices=formats, default=default, help=f"output format (default {default})")
    p.add_argument("--out", metavar="PATH", help="write to PATH instead of standard output")


def build_parser():
    parser = _Parser(prog="gibbstree", description=__doc__.splitlines()[0], allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"gibbstree {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("thresholds", help="theta_c and the coefficient thresholds theta_{k,i}", allow_abbrev=False)
    _add_model(p, theta=False)
    _add_output(p)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("fixed-points", help="fixed points of the reduced map", allow_abbrev=False)
    _add_model(p)
    p.add_argument("--include-axis", action="store_true", help="also list the x = 0 fixed points that exist for odd k")
    _add_output(p)
    p.set_defaults(func=cmd_fixed_points)

    p = sub.add_parser("phase-diagram", help="scan theta and tabulate fixed points", allow_abbrev=False)
    _add_model(p, theta=False)
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=0.99)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION, help="quadrature points per half interval")
    _add_output(p, default="csv")
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("operator-check", help="Hammerstein residuals of the positive laws", allow_abbrev=False)
    _add_model(p)
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--out", metavar="PATH", help="write to PATH instead of standard output")
    p.set_defaults(func=cmd_operator_check)

    p = sub.add_parser(
        "sample",
        help="Monte Carlo sampling of a splitting Gibbs measure",
        description="json: SampleStats over --samples configurations; csv: the first configuration only.",
        allow_abbrev=False,
    )
    _add_model(p)
    p.add_argument("--branch", choices=("unit", "plus", "minus"), default="unit")
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="run a verification suite", allow_abbrev=False)
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--k-max", type=int, default=20, help="largest k in the identity suite")
    p.add_argument("--m-max", type=int, default=21, help="largest odd m in the identity suite")
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--out", metavar="PATH", help="write to PATH instead of standard output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("iterate", help="exploratory damped iteration of H_k", allow_abbrev=False)
    _add_model(p)
    p.add_argument("--branch", choices=("unit", "plus", "minus"), default="unit", help="starting boundary law")
    p.add_argument("--perturbation", type=float, default=0.0, help="amplitude of the added (u - 1/2) perturbation")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--damping", type=float, default=1.0)
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION)
    p.add_argument("--out", metavar="PATH", help="write to PATH instead of standard output")
    p.set_defaults(func=cmd_iterate)
    return parser


def _validate(args):
    if getattr(args, "k", None) is not None:
        theta_critical(args.k, args.n)
    for name in ("samples", "steps", "resolution"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise DomainError(f"--{name} must be positive, got {value}")
    if getattr(args, "depth", None) is not None and args.depth < 0:
        raise DomainError(f"--depth must be >= 0, got {args.depth}")
    if getattr(args, "k_max", None) is not None and args.k_max < 1:
        raise DomainError(f"--k-max must be >= 1, got {args.k_max}")


def parse_and_run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
        text, code = args.func(args)
        _emit(text, getattr(args, "out", None))
        return code
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, InvalidLawError) as exc:
        print(f"gibbstree: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"gibbstree: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GibbsTreeError as exc:
        print(f"gibbstree: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"gibbstree: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(parse_and_run())
