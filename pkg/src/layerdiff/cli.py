"""Command-line front end.

    layerdiff solve       --config case.json [--out DIR] [--allow-unstable]
    layerdiff steady      --config case.json [--out DIR]
    layerdiff stability   --config case.json [--out DIR]
    layerdiff convergence --config case.json [--out DIR] [--preset paper|ci]

Exit codes: 0 success, 2 config error, 3 stability abort, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import AUTO, PRESETS, ConfigError, RunConfig, config_to_dict, load_config
from .discretise import discretise, full_node_table, reconstruct_full, sample_initial
from .problem import ProblemError
from .stability import stability_report
from .stepper import Scheme, StepCountError, march, steady_state, steps_for
from .tridiag import SingularMatrixError
from .verify import ZeroReferenceError, convergence_study, format_table, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_NUMERICAL = 4
AUTO_FRACTION = 0.95


class StabilityAbort(RuntimeError):
    pass


class NumericalFailure(RuntimeError):
    pass


def fmt(value) -> str:
    """At most 12 significant digits, trailing zeros dropped."""
    return "%.12g" % value


def write_nodes(path, mesh, values):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["layer", "j", "x", "u"])
        for layer, j, x, u in full_node_table(mesh, values):
            writer.writerow([layer, j, fmt(x), fmt(u)])


def _dump_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _out_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.out or cfg.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _snap_steps(t, tau):
    """Step count for ``t``: exact multiple if possible, else nearest."""
    try:
        return steps_for(t, tau)
    except StepCountError:
        return int(round(t / tau))


def cmd_solve(cfg: RunConfig, out: Path, allow_unstable: bool = False) -> int:
    if cfg.tau is None or cfg.t_end is None:
        raise ConfigError("solve needs tau and t_end")
    report = stability_report(cfg.problem, cfg.n)
    auto = cfg.tau == AUTO
    tau = AUTO_FRACTION * report.tau_max_table if auto else cfg.tau
    fe = cfg.scheme is Scheme.FORWARD_EULER
    if fe and tau > report.tau_max_table and not allow_unstable:
        b = report.binding
        raise StabilityAbort(
            f"forward Euler step {tau:.6g} exceeds the {b.label} bound {b.tau:.3g}; "
            "pass --allow-unstable to run anyway"
        )

    times = sorted(set(cfg.snapshots) | {cfg.t_end})
    if auto:
        steps = [_snap_steps(t, tau) for t in times]
    else:
        try:
            steps = [steps_for(t, tau) for t in times]
        except StepCountError as exc:
            raise ConfigError(str(exc)) from None
    actual = [k * tau for k in steps]

    mesh, umap, system = discretise(cfg.problem, cfg.n)
    u0 = sample_initial(cfg.problem, mesh, umap)
    t0 = time.perf_counter()
    res = march(system, u0, tau, actual[-1], cfg.scheme, actual, umap, cfg.problem)
    elapsed = time.perf_counter() - t0

    files = []
    for requested, t, state in zip(times, res.times, res.states):
        name = f"solution_{fmt(requested)}.csv"
        write_nodes(out / name, mesh, state)
        files.append({"requested_t": requested, "t": t, "file": name})

    meta = {
        "tau": tau,
        "tau_auto": auto,
        "scheme": cfg.scheme.value,
        "N": umap.N,
        "n": cfg.n,
        "steps": res.step_count,
        "snapshots": files,
        "diverged": res.diverged,
        "diverged_at_step": res.diverged_at_step,
        "elapsed_s": elapsed,
    }
    if fe:
        verdict = stability_report(cfg.problem, cfg.n, tau).spectral
        meta["stability"] = {
            "tau_max_table": report.tau_max_table,
            "tau_max_gershgorin": report.tau_max_gershgorin,
            "tau_max_exact": report.tau_max_exact,
            "binding": report.binding.label,
            "rho_forward": verdict.rho_forward,
            "stable": verdict.stable_forward,
            "within_bound": tau <= report.tau_max_table,
        }
    _dump_json(out / "run_meta.json", meta)
    print(f"solve: {cfg.scheme.value}, tau = {tau:.6g}, N = {umap.N}, {res.step_count} steps")
    for item in files:
        print(f"  t = {fmt(item['t'])} -> {item['file']}")
    if res.diverged:
        raise NumericalFailure(f"solution diverged at step {res.diverged_at_step} (t = {res.diverged_at_step * tau:.6g})")
    return EXIT_OK


def cmd_steady(cfg: RunConfig, out: Path) -> int:
    mesh, umap, system = discretise(cfg.problem, cfg.n)
    u = steady_state(system)
    if not np.all(np.isfinite(u)):
        raise NumericalFailure("steady-state solve produced non-finite values")
    write_nodes(out / "steady.csv", mesh, reconstruct_full(umap, u, cfg.problem))
    print(f"steady: N = {umap.N} -> steady.csv")
    return EXIT_OK


def format_stability(report) -> str:
    lines = [f"{'Equation class':<52} {'tau bound':>12}  note"]
    lines.append("-" * 80)
    for b in report.bounds:
        extra = ""
        if b.parts:
            extra = " (left %.4g, right %.4g)" % b.parts
        mark = " *" if b is report.binding else ""
        lines.append(f"{b.label:<52} {b.tau:>12.4e}  {b.note}{extra}{mark}")
    lines.append("-" * 80)
    lines.append(f"tau_max (closed form)   {report.tau_max_table:.6e}   binding: {report.binding.label}")
    lines.append(f"tau_max (Gershgorin)    {report.tau_max_gershgorin:.6e}")
    lines.append(f"tau_max (eigenvalues)   {report.tau_max_exact:.6e}")
    lines.append(f"classical h^2/(2D)      {report.tau_classical:.6e}   "
                 f"ratio classical/closed form = {report.tau_classical / report.tau_max_table:.4g}")
    if report.spectral is not None:
        s = report.spectral
        lines.append(f"at tau = {s.tau:.6g}: rho_F = {s.rho_forward:.8g}, "
                     f"rho_B = {s.rho_backward:.8g}, rho_C = {s.rho_crank_nicolson:.8g}")
    return "\n".join(lines)


def cmd_stability(cfg: RunConfig, out: Path) -> int:
    tau = cfg.tau
    if tau == AUTO:
        tau = AUTO_FRACTION * stability_report(cfg.problem, cfg.n).tau_max_table
    report = stability_report(cfg.problem, cfg.n, tau)
    _dump_json(out / "stability_report.json", report.to_dict())
    print(format_stability(report))
    return EXIT_OK


def cmd_convergence(cfg: RunConfig, out: Path) -> int:
    study = cfg.study
    if study is None:
        raise ConfigError("convergence needs a study section or --preset")
    references = {}
    studies = {}
    for scheme in study.schemes:
        try:
            studies[scheme] = convergence_study(
                cfg.problem, study.tau, study.h_list, study.t_eval, scheme, study.refine, references
            )
        except StepCountError as exc:
            raise ConfigError(str(exc)) from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    write_csv(out / "convergence.csv", studies)
    table = format_table(studies, f"Relative errors at t = {fmt(study.t_eval)}, tau = {study.tau:g}")
    (out / "convergence.txt").write_text(table + "\n")
    print(table)
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "steady": cmd_steady,
    "stability": cmd_stability,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="layerdiff", description="Finite volume solver for multilayer diffusion problems."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("solve", "march in time and write solution snapshots"),
        ("steady", "solve for the steady state"),
        ("stability", "report forward Euler time-step bounds"),
        ("convergence", "grid-refinement error study"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
        p.add_argument("--out", metavar="DIR", help="output directory (default: config output_dir or .)")
        p.add_argument("--allow-unstable", action="store_true",
                       help="run forward Euler beyond its stability bound")
        p.add_argument("--preset", choices=sorted(PRESETS), help="override the study parameters")
        p.add_argument("--dump-config", action="store_true",
                       help="print the canonicalised config before running")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.preset)
        if args.dump_config:
            print(json.dumps(config_to_dict(cfg), indent=2))
        out = _out_dir(args, cfg)
        if args.command == "solve":
            return cmd_solve(cfg, out, args.allow_unstable)
        return COMMANDS[args.command](cfg, out)
    except (ConfigError, ProblemError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StabilityAbort as exc:
        print(f"stability abort: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except (NumericalFailure, SingularMatrixError, ZeroReferenceError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
