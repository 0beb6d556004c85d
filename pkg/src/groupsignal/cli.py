"""Command-line interface.

Exit codes: 0 success, 1 assumption violation (or failed check), 2 config
error, 3 no stable interior equilibrium, 4 solver non-convergence, 5
simulated rest point not cutoff-shaped.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import report
from .config import ConfigError, Scenario, load, load_preset, preset_names
from .model import ModelSpec, validate
from .simulate import initial_population, run_dynamics
from .solver import (
    NonConvergence,
    SolverError,
    SolverOptions,
    multistart_scan,
    solve_equilibrium,
    solve_from,
)
from .statics import CUTOFFS, SHIFTERS, statics_report

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NO_STABLE, EXIT_NONCONVERGENCE, EXIT_NOT_CUTOFF = range(6)

SWEEP_PARAMS = ("alpha", "beta", "gamma", "mu_inside", "mu_outside", "delta_h", "delta_l", "kappa", "kappa0")
_ALIASES = {"mu_I": "mu_inside", "mu_O": "mu_outside", "kappa_0": "kappa0"}


class UsageError(ValueError):
    pass


def set_param(spec: ModelSpec, name: str, value: float) -> ModelSpec:
    name = _ALIASES.get(name, name)
    if name in ("alpha", "beta", "gamma"):
        return spec.with_policy(**{name: value})
    if name in ("mu_inside", "mu_outside"):
        return replace(spec, **{name: value})
    if name in ("delta_h", "delta_l"):
        if not hasattr(spec.action_cost, name):
            raise UsageError(f"{name} needs a linear_gap action cost")
        return replace(spec, action_cost=replace(spec.action_cost, **{name: value}))
    if name in ("kappa", "kappa0"):
        if not hasattr(spec.group_cost, name):
            raise UsageError(f"{name} needs a linear_gap group cost")
        return replace(spec, group_cost=replace(spec.group_cost, **{name: value}))
    raise UsageError(f"unknown sweep parameter {name!r} (choose from {', '.join(SWEEP_PARAMS)})")


def _nearest_stable(result, ref):
    cands = result.stable_interior
    if not cands:
        return None
    if ref is None:
        return cands[0]
    return min(cands, key=lambda e: e.profile.distance(ref))


def sweep(spec: ModelSpec, param: str, lo: float, hi: float, steps: int, options: SolverOptions):
    """One row per parameter value.  Each step starts Newton from the last
    stable solution and falls back to a full scan when that fails."""
    if steps < 2:
        raise UsageError("steps must be at least 2")
    if not lo < hi:
        raise UsageError("--from must be below --to")
    set_param(spec, param, lo)
    rows, prev = [], None
    for v in np.linspace(lo, hi, steps):
        row = {"schema": report.SWEEP_SCHEMA, "param": _ALIASES.get(param, param), "value": float(v)}
        try:
            s = set_param(spec, param, float(v))
            eq = None
            if prev is not None:
                try:
                    eq = solve_from(s, prev, options)
                    if not eq.stable_interior:
                        eq = None
                except (NonConvergence, ValueError):
                    eq = None
            if eq is None:
                eq = _nearest_stable(solve_equilibrium(s, options), prev)
            if eq is None:
                row["status"] = "no_stable_interior"
            else:
                prev = eq.profile
                rec = report.equilibrium_record(eq)
                row.update({k: rec[k] for k in report.SWEEP_COLUMNS if k in rec and k not in row})
                row["status"] = "ok"
        except SolverError as exc:
            row["status"] = f"error:{type(exc).__name__}"
        except ValueError as exc:
            row["status"] = f"invalid:{type(exc).__name__}"
        rows.append(row)
    return rows


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _scenario(args) -> Scenario:
    if (args.config is None) == (args.preset is None):
        raise UsageError("give exactly one of a config path or --preset")
    sc = load_preset(args.preset) if args.preset else load(args.config)
    if args.tol is not None:
        sc = replace(sc, solver=replace(sc.solver, tol=args.tol))
    return sc


def _emit(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_validate(args, sc: Scenario) -> int:
    rep = validate(sc.spec)
    if rep.ok:
        print(f"{sc.name}: all assumptions hold")
        return EXIT_OK
    for line in rep.lines():
        print(line)
    return EXIT_VIOLATION


def cmd_solve(args, sc: Scenario) -> int:
    try:
        result = solve_equilibrium(sc.spec, sc.solver)
        ms = multistart_scan(sc.spec, sc.solver.n_starts, sc.solver)
    except NonConvergence as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    doc = report.solve_document(sc.name, result, ms)
    csv_text = report.to_csv(report.SOLVE_COLUMNS, doc["equilibria"])
    json_text = report.to_json(doc)
    if args.out is not None:
        base = Path(args.out)
        if args.json or not args.csv:
            base.with_suffix(".json").write_text(json_text)
        if args.csv:
            base.with_suffix(".csv").write_text(csv_text)
        sys.stdout.write(report.render_solve(doc))
    else:
        if args.json:
            sys.stdout.write(json_text)
        if args.csv:
            sys.stdout.write(csv_text)
        if not (args.json or args.csv):
            sys.stdout.write(report.render_solve(doc))
    return EXIT_OK if result.stable_interior else EXIT_NO_STABLE


def cmd_statics(args, sc: Scenario) -> int:
    try:
        result = solve_equilibrium(sc.spec, sc.solver)
    except NonConvergence as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    if not result.stable_interior:
        print("no stable interior equilibrium; statics undefined", file=sys.stderr)
        return EXIT_NO_STABLE
    rep = statics_report(sc.spec, result.stable_interior[0], sc.solver.fd_step, sc.solver)
    doc = report.statics_document(sc.name, rep, SHIFTERS, CUTOFFS)
    if args.out is not None:
        Path(args.out).write_text(report.to_json(doc))
    sys.stdout.write(report.render_statics(doc, SHIFTERS, CUTOFFS))
    return EXIT_OK


def cmd_sweep(args, sc: Scenario) -> int:
    rows = sweep(sc.spec, args.param, args.lo, args.hi, args.steps, sc.solver)
    _emit(report.to_csv(report.SWEEP_COLUMNS, rows), args.out)
    ok = sum(r["status"] == "ok" for r in rows)
    if args.out is not None:
        print(f"{ok}/{len(rows)} rows solved")
    return EXIT_OK if 2 * ok >= len(rows) else EXIT_NO_STABLE


def cmd_simulate(args, sc: Scenario) -> int:
    opts = sc.simulate
    over = {k: getattr(args, k) for k in ("n", "max_iters", "damping", "start") if getattr(args, k) is not None}
    opts = replace(opts, **over)
    try:
        result = solve_equilibrium(sc.spec, sc.solver)
    except NonConvergence as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    eq = result.stable_interior[0] if result.stable_interior else None
    if eq is None and opts.start == "equilibrium":
        print("no stable interior equilibrium to start from", file=sys.stderr)
        return EXIT_NO_STABLE
    pop = initial_population(sc.spec, opts, eq.profile if eq else None)
    rest = run_dynamics(sc.spec, pop, opts.max_iters, opts.damping, opts.empty_beliefs)

    doc = {"scenario": sc.name, "n": opts.n, "converged": rest.converged, "iterations": rest.iterations,
           "cutoff_shaped": rest.cutoff_shaped, "tolerance": 2.0 / opts.n}
    if eq is not None:
        doc["solver"] = dict(zip(("theta_l", "theta_hat", "theta_h"),
                                 (eq.profile.theta_l, eq.profile.theta_hat, eq.profile.theta_h)))
    if rest.cutoffs is not None:
        c = rest.cutoffs
        doc["simulated"] = {"theta_l": c.theta_l, "theta_hat": c.theta_hat, "theta_h": c.theta_h}
        if eq is not None:
            diffs = {k: abs(doc["simulated"][k] - doc["solver"][k]) for k in doc["simulated"]}
            doc["abs_diff"] = diffs
            doc["max_deviation"] = max(diffs.values())
            doc["within_tolerance"] = doc["max_deviation"] <= doc["tolerance"]

    if args.out is not None:
        trace = [dict(zip(report.TRACE_COLUMNS, (report.TRACE_SCHEMA, *row))) for row in rest.trace]
        Path(args.out).write_text(report.to_csv(report.TRACE_COLUMNS, trace))
    code = EXIT_OK
    if not rest.cutoff_shaped:
        dump = Path(args.out).with_suffix(".assignment.csv") if args.out else Path(f"{sc.name}.assignment.csv")
        p = rest.population
        rows = [{"schema": report.ASSIGN_SCHEMA, "theta": t, "weight": w, "group": "h" if g else "l", "action": a}
                for t, w, g, a in zip(p.theta, p.weight, p.in_h, p.action)]
        dump.write_text(report.to_csv(report.ASSIGN_COLUMNS, rows))
        doc["assignment_dump"] = str(dump)
        code = EXIT_NOT_CUTOFF
    sys.stdout.write(report.to_json(doc))
    return code


def cmd_check(args, sc=None) -> int:
    from .acceptance import run_all

    results = run_all(verbose=True)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VIOLATION


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", nargs="?", help="scenario YAML file")
    common.add_argument("--preset", help=f"bundled scenario ({', '.join(preset_names())})")
    common.add_argument("--tol", type=float, help="residual tolerance accepted by the solver")
    common.add_argument("--seedless", action="store_true",
                        help="assert a run without randomness (always true; nothing is sampled)")

    p = argparse.ArgumentParser(prog="groupsignal", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check model assumptions")

    s = sub.add_parser("solve", parents=[common], help="all interior equilibria with stability")
    s.add_argument("--json", action="store_true")
    s.add_argument("--csv", action="store_true")
    s.add_argument("--out", help="output path; extension set by --json/--csv")

    s = sub.add_parser("statics", parents=[common], help="IFT and FD derivatives, sign verdicts")
    s.add_argument("--out", help="JSON output path")

    s = sub.add_parser("sweep", parents=[common], help="equilibria along a parameter path")
    s.add_argument("--param", required=True, help=", ".join(SWEEP_PARAMS))
    s.add_argument("--from", dest="lo", type=float, required=True)
    s.add_argument("--to", dest="hi", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--out", help="CSV output path (stdout if omitted)")

    s = sub.add_parser("simulate", parents=[common], help="best-response dynamics vs the solver")
    s.add_argument("--out", help="trace CSV path")
    s.add_argument("--n", type=int)
    s.add_argument("--max-iters", dest="max_iters", type=int)
    s.add_argument("--damping", type=float)
    s.add_argument("--start", choices=("equilibrium", "all_low", "all_high"))

    sub.add_parser("check", help="run the acceptance suite on bundled scenarios")
    return p


COMMANDS = {"validate": cmd_validate, "solve": cmd_solve, "statics": cmd_statics,
            "sweep": cmd_sweep, "simulate": cmd_simulate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check":
        return cmd_check(args)
    try:
        sc = _scenario(args)
        return COMMANDS[args.command](args, sc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read or write: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
