"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 bad input or arguments,
3 slope range clipped, 4 datum not solvable in the smooth superlinear
class, 5 necessary conditions failed, 6 feasibility inconclusive.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .conjugate import SlopeRangeError, fenchel_conjugate, fenchel_involution_residual
from .functionals import ZeroMassError, delta_J_fd, entropy, hg_diagnostic, total_mass
from .grid import Grid, InvalidPotential
from .logconcave import LogConcaveFn, classify, oplus
from .measures import (
    HypothesisError,
    area_measure_mu,
    area_measure_sigma,
    delta_J_repr_Adoubleprime,
    delta_J_repr_Aprime,
)
from .minkowski import (
    DatumInconsistentError,
    NecessaryConditionError,
    feasibility_diagnostic,
    recovered_density,
    solve_minkowski_1d,
)
from .suites import SUITES, run_suite

log = logging.getLogger("logcave")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SLOPES = 0, 1, 2, 3
EXIT_NOT_SOLVABLE, EXIT_NECESSARY, EXIT_INCONCLUSIVE = 4, 5, 6


class InputError(Exception):
    pass


def _setup_logging():
    level = os.environ.get("LOGCAVE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


# -- input ----------------------------------------------------------------------


def _load_fn(path):
    try:
        text = Path(path).read_text()
        if str(path).lower().endswith(".csv"):
            return LogConcaveFn(io.potential_from_csv(text))
        obj = json.loads(text)
        if "potential" in obj:
            return io.logconcave_from_json(obj)
        return LogConcaveFn(io.potential_from_json(obj))
    except (OSError, ValueError, KeyError, TypeError, InvalidPotential) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_potential(path):
    try:
        return io.read_potential(path)
    except (OSError, ValueError, KeyError, TypeError, InvalidPotential) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_datum(path):
    try:
        return io.read_datum(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _inputs(args, count):
    paths = args.inputs or []
    if len(paths) != count:
        raise InputError(f"expected {count} --in file(s), got {len(paths)}")
    return paths


def _grid_override(args, like, lo=None, hi=None):
    """Grid from ``--grid-lo/--grid-hi/--grid-n`` (or the given bounds), else ``None``."""
    lo = lo if lo is not None else args.grid_lo
    hi = hi if hi is not None else args.grid_hi
    n = args.grid_n
    if lo is None and hi is None and n is None:
        return None
    dim = like.dim
    lo = [lo] * dim if lo is not None else list(like.lo)
    hi = [hi] * dim if hi is not None else list(like.hi)
    n = [n] * dim if n is not None else list(like.n)
    try:
        return Grid(lo, hi, n)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _emit(args, obj):
    text = io.dumps(obj)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------------


def cmd_conjugate(args):
    u = _load_potential(_inputs(args, 1)[0])
    target = _grid_override(args, u.grid, args.target_lo, args.target_hi)
    us = fenchel_conjugate(u, target, refine=args.refine)
    resid = fenchel_involution_residual(u, us.grid)
    print(f"involution residual: {resid:.6e}", file=sys.stderr)
    out = {"conjugate": io.potential_to_json(us), "involution_residual": resid}
    if args.out and args.out.lower().endswith(".csv"):
        io.write_potential(args.out, us)
    else:
        _emit(args, out)
    return EXIT_OK


def cmd_oplus(args):
    a, b = (_load_fn(p) for p in _inputs(args, 2))
    grid = _grid_override(args, a.grid)
    h = oplus(a, b, args.alpha, args.beta, grid=grid)
    _emit(args, io.logconcave_to_json(h))
    return EXIT_OK


def cmd_mass(args):
    f = _load_fn(_inputs(args, 1)[0])
    J = total_mass(f)
    print(f"J = {J:.12g}", file=sys.stderr)
    _emit(args, {"mass": J, "class": f.class_tag})
    return EXIT_OK


def cmd_entropy(args):
    f = _load_fn(_inputs(args, 1)[0])
    e = entropy(f)
    print(f"Ent = {e:.12g}", file=sys.stderr)
    _emit(args, {"entropy": e, "mass": total_mass(f)})
    return EXIT_OK


def _representation(f, g):
    try:
        if f.class_tag == "Aprime" and g.class_tag == "Aprime":
            return delta_J_repr_Aprime(f, g), "interior"
        if f.class_tag == "Adoubleprime" and f.dim == 1:
            return delta_J_repr_Adoubleprime(f, g), "interior+boundary"
    except (HypothesisError, ValueError) as exc:
        return None, f"unavailable: {exc}"
    return None, f"unavailable for classes {f.class_tag}, {g.class_tag}"


def cmd_deltaj(args):
    f, g = (_load_fn(p) for p in _inputs(args, 2))
    est = delta_J_fd(f, g, t0=args.t0, levels=args.levels)
    rep, how = _representation(f, g)
    print(f"finite differences: {est.value:.10g} +- {est.error_bar:.2g}", file=sys.stderr)
    print(f"representation ({how}): {rep if rep is None else format(rep, '.10g')}", file=sys.stderr)
    _emit(args, {"fd": est.to_json(), "representation": rep, "representation_method": how})
    return EXIT_OK


def cmd_measure(args):
    f = _load_fn(_inputs(args, 1)[0])
    out = {"mu": area_measure_mu(f).to_json()}
    if f.class_tag == "Adoubleprime":
        out["sigma"] = area_measure_sigma(f).to_json()
    _emit(args, out)
    return EXIT_OK


def _table(reports):
    w = max(len(r.name) for r in reports)
    lines = [f"{'check':<{w}}  {'lhs':>14}  {'rhs':>14}  {'gap':>11}  {'status':<9} result"]
    for r in reports:
        lines.append(f"{r.name:<{w}}  {r.lhs:>14.8g}  {r.rhs:>14.8g}  {r.gap:>11.3e}  {r.status:<9} "
                     f"{'PASS' if r.passes else 'FAIL'}")
    return "\n".join(lines)


def cmd_verify(args):
    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    datum = _load_datum(args.inputs[0]) if args.inputs else None
    reports = run_suite(args.suite, seed=args.seed, tol=args.tol, datum=datum)
    print(_table(reports))
    if args.out:
        Path(args.out).write_text(io.dumps([r.to_json() for r in reports]))
    return EXIT_OK if all(r.passes for r in reports) else EXIT_FAIL


def _bundle_paths(out):
    out = Path(out or "solution.json")
    stem = out.with_suffix("")
    return out, {k: Path(f"{stem}_{k}.csv") for k in ("phi", "f", "density", "trace")}


def _write_trace(path, trace):
    rows_tail, rows_y, rows_d = [], [], []
    for tail in ("negative", "positive"):
        rows_tail += [tail] * len(trace.y[tail])
        rows_y += list(trace.y[tail])
        rows_d += list(trace.trace[tail])
    io.write_csv(path, ["tail", "y", "trace"], [rows_tail, rows_y, rows_d])


def cmd_solve(args):
    datum = _load_datum(_inputs(args, 1)[0])
    out, csvs = _bundle_paths(args.out)
    try:
        sol = solve_minkowski_1d(datum)
    except (NecessaryConditionError, DatumInconsistentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NECESSARY
    out.write_text(io.dumps(sol.to_json()))
    y = sol.phi.grid.axes()[0]
    io.write_csv(csvs["phi"], ["y", "phi"], [y, sol.phi.values])
    x = sol.f.grid.axes()[0]
    io.write_csv(csvs["f"], ["x", "u", "f"], [x, sol.f.u, sol.f.values()])
    yy, rec = recovered_density(sol)
    m = np.interp(yy, datum.y, datum.density)
    io.write_csv(csvs["density"], ["y", "m_input", "m_recovered"], [yy, m, rec])
    trace = feasibility_diagnostic(datum)
    _write_trace(csvs["trace"], trace)
    print(f"feasibility: {sol.feasibility}", file=sys.stderr)
    print(f"L1 recovery error: {sol.diagnostics['ode_residual_rel']:.3e}", file=sys.stderr)
    return {"solvable_Aprime": EXIT_OK, "not_solvable_Aprime": EXIT_NOT_SOLVABLE}.get(
        sol.feasibility, EXIT_INCONCLUSIVE)


def _is_datum(path):
    if not str(path).lower().endswith(".csv"):
        return False
    with open(path) as fh:
        head = fh.readline().strip().lower().replace(" ", "")
    return head.startswith("y,m")


def cmd_diagnose(args):
    path = _inputs(args, 1)[0]
    if _is_datum(path):
        trace = feasibility_diagnostic(_load_datum(path))
        print(f"feasibility: {trace.verdict}", file=sys.stderr)
        _emit(args, trace.to_json())
        return EXIT_OK
    f = _load_fn(path)
    report = classify(f).to_json()
    c, ok = hg_diagnostic(f) if f.class_tag == "Aprime" else (None, None)
    print(f"class: {f.class_tag}", file=sys.stderr)
    _emit(args, {"class": report, "hessian_lower_bound": c, "hessian_condition": ok})
    return EXIT_OK


COMMANDS = {
    "conjugate": (cmd_conjugate, "Fenchel conjugate of a potential"),
    "oplus": (cmd_oplus, "alpha.f (+) beta.g"),
    "mass": (cmd_mass, "total mass J(f)"),
    "entropy": (cmd_entropy, "entropy Ent(f)"),
    "deltaj": (cmd_deltaj, "first variation: finite differences and representation"),
    "measure": (cmd_measure, "area measures mu(f) and sigma(f)"),
    "verify": (cmd_verify, "run a verification suite"),
    "solve": (cmd_solve, "solve the 1-D Minkowski problem for a datum"),
    "diagnose": (cmd_diagnose, "classify a function or a datum"),
}


def build_parser():
    p = argparse.ArgumentParser(prog="logcave", description="Numerical toolkit for log-concave functions.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("--in", dest="inputs", action="append", metavar="FILE")
        s.add_argument("--out", metavar="FILE")
        s.add_argument("--grid-n", type=int)
        s.add_argument("--grid-lo", type=float)
        s.add_argument("--grid-hi", type=float)
        s.add_argument("--t0", type=float, default=0.1)
        s.add_argument("--levels", type=int, default=6)
        s.add_argument("--tol", type=float)
        s.add_argument("--seed", type=int, default=42)
        if name == "conjugate":
            s.add_argument("--target-lo", type=float)
            s.add_argument("--target-hi", type=float)
            s.add_argument("--refine", action="store_true", help="local quadratic refinement of maximizers")
        if name == "oplus":
            s.add_argument("--alpha", type=float, default=1.0)
            s.add_argument("--beta", type=float, default=1.0)
        if name == "verify":
            s.add_argument("--suite", default="all")
    return p


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        with warnings.catch_warnings():
            if args.command != "verify":
                warnings.simplefilter("default")
            return func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SlopeRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SLOPES
    except (ZeroMassError, HypothesisError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
