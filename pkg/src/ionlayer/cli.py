"""Command-line front end.

Every subcommand writes CSV or JSON to ``--out`` (stdout when omitted).
Exit codes: 0 success, 1 failed verification, 2 invalid input, 3 numerical
non-convergence.  Set ``IONLAYER_LOG=INFO`` (or ``DEBUG``) for progress
messages on stderr.

Plotting is left to external tools, for example::

    ionlayer figure1 --lambda 1e4 --out fig1.csv
    python3 -c "import pandas; pandas.read_csv('fig1.csv').plot(x='r').figure.savefig('fig1.png')"
"""

import argparse
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import asymptotics as asym
from . import capacitance as cap
from . import ccpb
from . import concentration as conc
from .errors import BlowUp, IonLayerError, NoConvergence, QuadratureStall
from .exact import SingleSpeciesSolution, eval_du, eval_rho, eval_u
from .io import columns_csv_text, csv_text, json_text, write_text
from .quadrature import graded_mesh
from .verify import DEFAULT_LAMBDA_GRID, SUITES, run_verify

log = logging.getLogger("ionlayer")

LAMBDA_ENVELOPE = (1e-6, 1e10)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NO_CONVERGENCE = 3


class UsageError(Exception):
    pass


# --- argument parsing ---------------------------------------------------------


def parse_float_list(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def parse_lambda_grid(text):
    """``start:stop:count`` (log-spaced, endpoints exact) or a comma list."""
    if ":" not in text:
        return parse_float_list(text)
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda grid {text!r}") from None
    if not (start > 0 and stop > 0 and count >= 1):
        raise argparse.ArgumentTypeError("lambda grid needs positive bounds and count >= 1")
    if count == 1:
        return [start]
    grid = list(10.0 ** np.linspace(math.log10(start), math.log10(stop), count))
    grid[0], grid[-1] = start, stop
    return grid


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ionlayer",
        description="Boundary-layer solutions of nonlocal Poisson-Boltzmann equations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, lam=True, grid=False):
        if lam:
            p.add_argument("--lambda", dest="lam", type=float, default=1e4, help="ion parameter (default 1e4)")
        if grid:
            p.add_argument("--grid", type=int, default=None, help="number of grid intervals")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    def sweep_args(p):
        p.add_argument(
            "--lambda-grid",
            type=parse_lambda_grid,
            default=None,
            help="start:stop:count (log-spaced) or comma list; overrides --lambda",
        )
        p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("solve", help="closed-form single-species profile r,u,du,rho")
    common(p, grid=True)
    p.add_argument("--tol", type=float, default=1e-13, help="eigenvalue tolerance")

    p = sub.add_parser("ccpb", help="two-species profile r,v,dv,u,w")
    common(p, grid=True)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--tol", type=float, default=1e-10, help="outer and ODE tolerance")
    p.add_argument("--method", choices=ccpb.METHODS, default="newton")

    p = sub.add_parser("asym", help="asymptotic expansions against the exact solution")
    common(p)
    sweep_args(p)
    p.add_argument("--expansion", action="append", choices=sorted(asym.EXPANSIONS), help="repeatable; default all")
    p.add_argument("--order", type=int, default=None)
    p.add_argument(
        "--p",
        type=float,
        default=None,
        help="with --alpha, report the near-field point r = 1 - p lam^-alpha instead",
    )
    p.add_argument(
        "--alpha",
        type=float,
        default=None,
        help="near-field exponent; 1 and 2 select their dedicated formulas by exact comparison",
    )

    p = sub.add_parser("capacitance", help="capacitance of [1 - p lam^-alpha, 1]")
    common(p)
    sweep_args(p)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0, help="1 selects the g(p) case by exact comparison")

    p = sub.add_parser("concentration", help="charge and energy functionals on the test-function catalog")
    common(p)
    sweep_args(p)
    p.add_argument("--h", action="append", choices=sorted(conc.CATALOG), help="repeatable; default all")
    p.add_argument("--tol", type=float, default=conc.DEFAULT_RTOL, help="quadrature relative tolerance")

    p = sub.add_parser("figure1", help="v profiles at fixed lambda for several mu")
    common(p, grid=True)
    p.add_argument("--mu", type=parse_float_list, default=[1e4, 1e3, 1e2, 10.0, 0.0], help="comma list")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("verify", help="run invariant suites; JSON report")
    p.add_argument("--suite", choices=["all", *SUITES], default="all")
    p.add_argument("--lambda-grid", type=parse_lambda_grid, default=list(DEFAULT_LAMBDA_GRID))
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json",), default="json")
    return parser


# --- helpers ----------------------------------------------------------------------


def _warn_envelope(lams):
    lo, hi = LAMBDA_ENVELOPE
    for lam in lams:
        if not (lo <= lam <= hi):
            log.warning("lambda = %g is outside the supported range [%g, %g]; proceeding", lam, lo, hi)


def _check_positive(name, x):
    if not (x > 0 and math.isfinite(x)):
        raise UsageError(f"{name} must be positive and finite, got {x!r}")


def _lambda_list(args):
    lams = args.lambda_grid if getattr(args, "lambda_grid", None) else [args.lam]
    for lam in lams:
        _check_positive("lambda", lam)
    _warn_envelope(lams)
    return lams


def _pmap(fn, items, jobs):
    """``map`` over ``items``, in order, with up to ``jobs`` processes."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items))


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        write_text(out, text)
        log.info("wrote %s", out)


def _rows_to_text(header, rows, fmt):
    if fmt == "csv":
        return csv_text(header, rows)
    return json_text([dict(zip(header, r)) for r in rows])


# --- subcommands ------------------------------------------------------------------


def cmd_solve(args):
    lam = args.lam
    _check_positive("lambda", lam)
    _warn_envelope([lam])
    n = args.grid or 2000
    if n < 2:
        raise UsageError("--grid must be at least 2")
    sol = SingleSpeciesSolution.from_lambda(lam, tol=args.tol)
    r = graded_mesh(1.0 / max(lam, 1.0), n)
    cols = {"r": r, "u": eval_u(sol, r), "du": eval_du(sol, r), "rho": eval_rho(sol, r)}
    if args.format == "csv":
        return columns_csv_text(cols)
    return json_text({"lambda": lam, "j": sol.j, "i": sol.i, **cols})


def _ccpb_params(args, mu):
    grid = args.grid or 4000
    return ccpb.CcpbParams(
        lam=args.lam,
        mu=mu,
        grid_size=grid,
        outer_tol=args.tol,
        ode_tol=args.tol,
        method=getattr(args, "method", "newton"),
    )


def cmd_ccpb(args):
    _check_positive("lambda", args.lam)
    _warn_envelope([args.lam])
    sol = ccpb.solve_ccpb(_ccpb_params(args, args.mu))
    if args.format == "csv":
        if args.out is not None:
            write_text(args.out + ".json", ccpb.solution_sidecar(sol))
        return ccpb.solution_csv(sol)
    exact = SingleSpeciesSolution.from_lambda(sol.lam)
    u = eval_u(exact, sol.nodes)
    return json_text(
        {
            "lambda": sol.lam,
            "mu": sol.mu,
            "a": sol.a,
            "b": sol.b,
            "outer_iters": sol.outer_iters,
            "converged": sol.converged,
            "r": sol.nodes,
            "v": sol.v,
            "dv": sol.dv,
            "u": u,
            "w": sol.v - u,
        }
    )


def _near_row(item):
    p, alpha, lam = item
    rep = asym.near_field_report(p, alpha, lam)
    return (lam, p, alpha, rep["u"], rep["u_pred"], rep["du"], rep["du_pred"])


def cmd_asym(args):
    lams = _lambda_list(args)
    if (args.p is None) != (args.alpha is None):
        raise UsageError("--p and --alpha must be given together")
    if args.p is not None:
        _check_positive("p", args.p)
        _check_positive("alpha", args.alpha)
        rows = _pmap(_near_row, [(args.p, args.alpha, lam) for lam in lams], args.jobs)
        header = ("lambda", "p", "alpha", "u", "u_pred", "du", "du_pred")
        return _rows_to_text(header, rows, args.format)
    names = args.expansion or list(asym.EXPANSIONS)
    reports = []
    for name in names:
        reports.extend(asym.sweep(name, lams, args.order))
    if args.format == "csv":
        return asym.reports_to_csv(reports)
    return asym.reports_to_json(reports)


def _cap_point(item):
    p, alpha, lam = item
    return cap.capacitance_sweep(p, alpha, [lam])[0]


def cmd_capacitance(args):
    lams = _lambda_list(args)
    _check_positive("p", args.p)
    _check_positive("alpha", args.alpha)
    results = _pmap(_cap_point, [(args.p, args.alpha, lam) for lam in lams], args.jobs)
    return _rows_to_text(cap.CSV_HEADER, [r.row() for r in results], args.format)


def _conc_point(item):
    lam, ids, rtol = item
    return conc.concentration_sweep([lam], ids, rtol)


def cmd_concentration(args):
    lams = _lambda_list(args)
    _check_positive("tol", args.tol)
    ids = args.h or list(conc.CATALOG)
    chunks = _pmap(_conc_point, [(lam, ids, args.tol) for lam in lams], args.jobs)
    rows = [r.row() for chunk in chunks for r in chunk]
    return _rows_to_text(conc.CSV_HEADER, rows, args.format)


def _family_profile(params):
    sol = ccpb.solve_ccpb(params)
    return sol.nodes, sol.v


def cmd_figure1(args):
    _check_positive("lambda", args.lam)
    _warn_envelope([args.lam])
    params = [_ccpb_params(args, mu) for mu in args.mu]
    profiles = _pmap(_family_profile, params, args.jobs)
    cols = {"r": profiles[0][0]}
    for mu, (_, v) in zip(args.mu, profiles):
        cols[f"v_mu={mu:g}"] = v
    if args.format == "csv":
        return columns_csv_text(cols)
    return json_text({"lambda": args.lam, "mu": args.mu, "columns": cols})


def cmd_verify(args):
    for lam in args.lambda_grid:
        _check_positive("lambda", lam)
    _warn_envelope(args.lambda_grid)
    report = run_verify(args.suite, args.lambda_grid)
    for name, suite in report["suites"].items():
        for c in suite["checks"]:
            level = logging.INFO if c["passed"] else logging.ERROR
            log.log(level, "%s / %s: %s %s", name, c["name"], "pass" if c["passed"] else "FAIL", c["detail"])
    return json_text(report), report["passed"]


COMMANDS = {
    "solve": cmd_solve,
    "ccpb": cmd_ccpb,
    "asym": cmd_asym,
    "capacitance": cmd_capacitance,
    "concentration": cmd_concentration,
    "figure1": cmd_figure1,
    "verify": cmd_verify,
}


def _setup_logging():
    level = os.environ.get("IONLAYER_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def run(argv=None):
    """Parse ``argv`` and dispatch; returns the process exit code."""
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        parser.print_usage(sys.stderr)
        print("ionlayer: error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        out = COMMANDS[args.command](args)
    except (NoConvergence, BlowUp, QuadratureStall) as exc:
        residual = getattr(exc, "residual", None)
        extra = f" (last residual {residual:.3e})" if residual is not None else ""
        print(f"ionlayer: no convergence: {exc}{extra}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (UsageError, IonLayerError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"ionlayer: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    passed = True
    if isinstance(out, tuple):
        out, passed = out
    _emit(out, args.out)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
