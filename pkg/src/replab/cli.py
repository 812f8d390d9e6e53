"""Command line front end.

Subcommands: torsion | simulate | minimize | sweep | verify.  Every command
reads one JSON config (--config), resolves output paths against --out, and
returns a documented exit code:

    0  success, all enabled checks passed
    1  a configured check failed (regime mismatch, monotonicity, residual)
    2  invalid configuration
    3  I/O failure
    4  malformed series CSV
    5  numerical solver failure or aborted simulation
    6  minimization divergence or iteration budget exhausted

Sweep cells are independent simulations and may execute in parallel
(--jobs, or the REPLAB_JOBS environment variable); each cell owns its
output files and the summary is written once at the end by the
orchestrator, so identical configs produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import ConfigError, RunConfig, load_config, parse_config
from .diagnostics import VerificationReport, verify_series
from .evolution import SimulationAbort, run
from .grid import Field, Grid, integrate
from .initdata import InitialDataError, make_initial, regularize_initial
from .poisson import SolverError, solve_torsion
from .seriesio import SeriesFormatError, read_series, write_series
from .variational import (DivergenceError, IterationLimitError,
                          minimize_dirichlet)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SERIES_FORMAT = 4
EXIT_SOLVER = 5
EXIT_MINIMIZE = 6


def _say(quiet: bool, *parts) -> None:
    if not quiet:
        print(*parts)


def _resolve(out_dir: str, path: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, path)


def _report_to_dict(report: VerificationReport, extra_notes=()) -> dict:
    def mono(check):
        if check is None:
            return None
        return {"passed": check.passed, "worst_violation": check.worst_violation}

    return {
        "regime": report.regime,
        "energy_monotone": mono(report.energy_monotone),
        "mass_monotone": mono(report.mass_monotone),
        "mass_ode_residual": report.mass_ode_residual,
        "energy_limit_gap": report.energy_limit_gap,
        "h1_limit_gap": report.h1_limit_gap,
        "notes": list(report.notes) + list(extra_notes),
    }


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _enabled_checks_pass(report: VerificationReport, rc: RunConfig,
                         median_dt: float, quiet: bool) -> bool:
    ok = True
    checks = rc.checks
    if checks.energy_slack_per_step is not None and report.energy_monotone is not None:
        if not report.energy_monotone.passed:
            _say(quiet, f"CHECK FAILED: energy monotonicity, worst excess "
                        f"{report.energy_monotone.worst_violation:.3e}")
            ok = False
    if checks.mass_slack_per_step is not None and report.mass_monotone is not None:
        if not report.mass_monotone.passed:
            _say(quiet, f"CHECK FAILED: mass monotonicity, worst excess "
                        f"{report.mass_monotone.worst_violation:.3e}")
            ok = False
    if checks.mass_ode_coeff is not None and rc.sim is not None:
        bound = checks.mass_ode_coeff * (median_dt + rc.sim.eps)
        if report.mass_ode_residual > bound:
            _say(quiet, f"CHECK FAILED: mass identity residual "
                        f"{report.mass_ode_residual:.3e} exceeds {bound:.3e}")
            ok = False
    if checks.expected_regime is not None:
        if report.regime != checks.expected_regime:
            _say(quiet, f"CHECK FAILED: regime '{report.regime}' but expected "
                        f"'{checks.expected_regime}'")
            ok = False
    return ok


def _simulate_to_files(rc: RunConfig, series_path: str, report_path: str,
                       quiet: bool) -> tuple[VerificationReport, float]:
    if rc.profile is None or rc.sim is None:
        raise ConfigError("simulate requires 'profile' and 'sim' sections")
    g = rc.build_grid()
    ts = solve_torsion(g, rc.torsion_tol)
    u0, _ = make_initial(rc.profile, g, ts.phi)
    u0eps = regularize_initial(u0, rc.sim.eps, g)
    state, records = run(u0eps, rc.sim, g, ts)
    write_series(series_path, records)
    report = verify_series(
        records, rc.sim, ts,
        energy_slack_per_step=rc.checks.energy_slack_per_step or 1e-8,
        mass_slack_per_step=rc.checks.mass_slack_per_step or 1e-10)
    _write_json(report_path, _report_to_dict(
        report, extra_notes=[f"clipped nodes: {state.clipped_total}",
                             f"steps: {state.step_index}"]))
    if state.clipped_total:
        _say(quiet, f"WARNING: {state.clipped_total} node updates were "
                    f"floored at eps")
    dts = [r.dt for r in records if r.dt > 0.0]
    median_dt = float(np.median(dts)) if dts else 0.0
    _say(quiet, f"regime: {state.regime}  t={state.t:.6g}  "
                f"steps={state.step_index}")
    _say(quiet, f"series: {series_path}")
    _say(quiet, f"report: {report_path}")
    return report, median_dt


def cmd_torsion(rc: RunConfig, out_dir: str, quiet: bool) -> int:
    g = rc.build_grid()
    ts = solve_torsion(g, rc.torsion_tol)
    _say(quiet, f"torsion integral: {ts.torsion_integral!r}")
    _say(quiet, f"target energy:    {ts.target_energy!r}")
    _say(quiet, f"solver residual:  {ts.solver_residual:.3e}")
    path = _resolve(out_dir, rc.outputs.series_path)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        if g.dim == 1:
            fh.write("x,phi\n")
            for x, v in zip(g.axis(0), ts.phi.values):
                fh.write(f"{x!r},{v!r}\n")
        else:
            fh.write("x,y,phi\n")
            xs, ys = g.axis(0), g.axis(1)
            for i, x in enumerate(xs):
                for j, y in enumerate(ys):
                    fh.write(f"{x!r},{y!r},{ts.phi.values[i, j]!r}\n")
    _say(quiet, f"samples: {path}")
    return EXIT_OK


def cmd_simulate(rc: RunConfig, out_dir: str, quiet: bool) -> int:
    series_path = _resolve(out_dir, rc.outputs.series_path)
    report_path = _resolve(out_dir, rc.outputs.report_path)
    report, median_dt = _simulate_to_files(rc, series_path, report_path, quiet)
    return EXIT_OK if _enabled_checks_pass(report, rc, median_dt, quiet) \
        else EXIT_CHECK_FAILED


def cmd_minimize(rc: RunConfig, out_dir: str, quiet: bool) -> int:
    g = rc.build_grid()
    mc = rc.minimize
    if mc.init is None:
        # uniform unit-mass start: constant over the interior, zero trace
        c = 1.0 / (g.cell_volume * g.num_nodes)
        init = Field(np.full(g.shape, c), 0.0)
    else:
        ts = solve_torsion(g, rc.torsion_tol)
        init, _ = make_initial(mc.init, g, ts.phi)
        if abs(integrate(init, g) - 1.0) > 1e-8:
            raise ConfigError("minimize init profile must have unit mass")
    result = minimize_dirichlet(g, init, step=mc.step, tol=mc.tol,
                                max_iter=mc.max_iter)
    _say(quiet, f"value:          {result.value!r}")
    _say(quiet, f"iterations:     {result.iterations}")
    _say(quiet, f"kkt residual:   {result.kkt_residual:.3e}")
    _say(quiet, f"oracle value gap: {result.oracle_value_gap:.3e}")
    _say(quiet, f"oracle h1 gap:    {result.oracle_h1_gap:.3e}")
    path = _resolve(out_dir, rc.outputs.report_path)
    _write_json(path, {
        "value": result.value,
        "iterations": result.iterations,
        "kkt_residual": result.kkt_residual,
        "oracle_value_gap": result.oracle_value_gap,
        "oracle_h1_gap": result.oracle_h1_gap,
        "mass_drift": result.mass_drift,
    })
    _say(quiet, f"report: {path}")
    return EXIT_OK


def _sweep_cell(payload: dict) -> dict:
    """Executed in a worker process; returns one summary row."""
    row = {"mass": payload["mass"], "eps": payload["eps"],
           "h": payload["h"], "regime": "error",
           "final_energy": "", "h1_gap": "", "error": ""}
    try:
        rc = parse_config(payload["doc"])
        report, _ = _simulate_to_files(rc, payload["series_path"],
                                       payload["report_path"], quiet=True)
        records = read_series(payload["series_path"])
        row["regime"] = report.regime
        row["final_energy"] = repr(records[-1].energy)
        row["h1_gap"] = repr(records[-1].h1_dist)
    except Exception as exc:  # cell aborts are recorded, never fatal
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(rc: RunConfig, base_doc: dict, out_dir: str, jobs: int,
              quiet: bool) -> int:
    if rc.sweep is None:
        raise ConfigError("sweep requires a 'sweep' section")
    if rc.profile is None or rc.sim is None:
        raise ConfigError("sweep requires 'profile' and 'sim' sections")
    payloads = []
    for mass, eps, n in itertools.product(rc.sweep.masses, rc.sweep.eps,
                                          rc.sweep.n):
        doc = json.loads(json.dumps(base_doc))  # deep copy
        doc.pop("sweep", None)
        doc.setdefault("profile", {})["target_mass"] = mass
        doc.setdefault("sim", {})["eps"] = eps
        doc["domain"]["n"] = list(n)
        cell_rc = parse_config(doc)  # fail fast before any compute
        g = cell_rc.build_grid()
        tag = f"m{mass:g}_eps{eps:g}_n{'x'.join(str(k) for k in n)}"
        cell_dir = os.path.join(out_dir, "cells", tag)
        os.makedirs(cell_dir, exist_ok=True)
        payloads.append({
            "doc": doc, "mass": mass, "eps": eps, "h": g.min_spacing,
            "series_path": os.path.join(cell_dir, "series.csv"),
            "report_path": os.path.join(cell_dir, "report.json"),
        })
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_cell, payloads))
    else:
        rows = [_sweep_cell(p) for p in payloads]
    summary_path = _resolve(out_dir, "summary.csv")
    with open(summary_path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("mass,eps,h,regime,final_energy,h1_gap\n")
        for row in rows:
            fh.write(f"{row['mass']!r},{row['eps']!r},{row['h']!r},"
                     f"{row['regime']},{row['final_energy']},{row['h1_gap']}\n")
    failures = [r for r in rows if r["error"]]
    for r in failures:
        _say(quiet, f"cell mass={r['mass']} eps={r['eps']}: {r['error']}")
    _say(quiet, f"summary: {summary_path} "
                f"({len(rows)} cells, {len(failures)} failed)")
    return EXIT_CHECK_FAILED if failures else EXIT_OK


def cmd_verify(rc: RunConfig, series_path: str, out_dir: str,
               quiet: bool) -> int:
    if rc.sim is None:
        raise ConfigError("verify requires a 'sim' section")
    records = read_series(series_path)
    g = rc.build_grid()
    ts = solve_torsion(g, rc.torsion_tol)
    report = verify_series(
        records, rc.sim, ts,
        energy_slack_per_step=rc.checks.energy_slack_per_step or 1e-8,
        mass_slack_per_step=rc.checks.mass_slack_per_step or 1e-10)
    path = _resolve(out_dir, rc.outputs.report_path)
    _write_json(path, _report_to_dict(report))
    _say(quiet, f"regime: {report.regime}")
    if report.energy_monotone is not None:
        verdict = "pass" if report.energy_monotone.passed else "FAIL"
        _say(quiet, f"energy monotone: {verdict} "
                    f"(worst {report.energy_monotone.worst_violation:.3e})")
    if report.mass_monotone is not None:
        verdict = "pass" if report.mass_monotone.passed else "FAIL"
        _say(quiet, f"mass monotone:   {verdict} "
                    f"(worst {report.mass_monotone.worst_violation:.3e})")
    _say(quiet, f"mass identity residual: {report.mass_ode_residual:.3e}")
    if report.energy_limit_gap is not None:
        _say(quiet, f"energy limit gap: {report.energy_limit_gap:.3e}")
    _say(quiet, f"report: {path}")
    dts = [r.dt for r in records if r.dt > 0.0]
    median_dt = float(np.median(dts)) if dts else 0.0
    return EXIT_OK if _enabled_checks_pass(report, rc, median_dt, quiet) \
        else EXIT_CHECK_FAILED


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="replab",
        description="numerical laboratory for the degenerate nonlocal flow")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, extra in [("torsion", None), ("simulate", None),
                        ("minimize", None), ("sweep", "jobs"),
                        ("verify", "series")]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--quiet", action="store_true")
        if extra == "jobs":
            p.add_argument("--jobs", type=int, default=None,
                           help="parallel sweep cells "
                                "(default: REPLAB_JOBS or 1)")
        if extra == "series":
            p.add_argument("series", help="series CSV to verify")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    quiet = args.quiet
    try:
        rc = load_config(args.config)
        if args.command == "torsion":
            return cmd_torsion(rc, args.out, quiet)
        if args.command == "simulate":
            return cmd_simulate(rc, args.out, quiet)
        if args.command == "minimize":
            return cmd_minimize(rc, args.out, quiet)
        if args.command == "sweep":
            jobs = args.jobs
            if jobs is None:
                jobs = int(os.environ.get("REPLAB_JOBS", "1"))
            with open(args.config, "r", encoding="utf-8") as fh:
                base_doc = json.load(fh)
            return cmd_sweep(rc, base_doc, args.out, jobs, quiet)
        if args.command == "verify":
            return cmd_verify(rc, args.series, args.out, quiet)
        raise AssertionError(f"unhandled command {args.command}")
    except (ConfigError, InitialDataError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SeriesFormatError as exc:
        print(f"series format error: {exc}", file=sys.stderr)
        return EXIT_SERIES_FORMAT
    except (SolverError, SimulationAbort) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DivergenceError, IterationLimitError) as exc:
        print(f"minimization error: {exc}", file=sys.stderr)
        return EXIT_MINIMIZE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
