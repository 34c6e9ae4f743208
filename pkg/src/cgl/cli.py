"""Batch front end: check-params, run, sweep, verify, report.

Exit codes: 0 success; 1 admissibility violations / failed certificates;
2 unreadable or malformed config; 3 solver failure (step index printed).
Sweeps fan out to a process pool sized by CGL_THREADS (default: cpu count,
capped at 8); cells are isolated and the summary preserves input order.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import ConfigError, load_config, parse_config, parse_pairs
from .diagnostics import energy_balance, h1_apriori
from .grid import write_snapshot
from .params import validate
from .timestepper import StepError, run
from .verify import SUITES, SuiteRunner


def _worker_count() -> int:
    env = os.environ.get("CGL_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def cmd_check_params(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    report = validate(config.model)
    print(report)
    return 0 if report.ok else 1


def _run_config(config, out_dir):
    spec = config.operator_spec()
    u0 = config.initial_field()
    trajectory = run(u0, config.forcing, config.time, spec)

    ledger_path = config.outputs.get("ledger") or os.path.join(out_dir, "ledger.csv")
    snap_dir = config.outputs.get("snapshots") or os.path.join(out_dir, "snapshots")
    os.makedirs(os.path.dirname(os.path.abspath(ledger_path)), exist_ok=True)
    os.makedirs(snap_dir, exist_ok=True)
    trajectory.ledger.write_csv(ledger_path)
    for step_idx, snap in zip(trajectory.snapshot_steps, trajectory.snapshots):
        write_snapshot(snap, os.path.join(snap_dir, f"snap_{step_idx:06d}.cglf"))
    if trajectory.sections is not None:
        for step_idx, section in zip(trajectory.snapshot_steps, trajectory.sections):
            write_snapshot(section, os.path.join(snap_dir, f"section_{step_idx:06d}.cglf"))
    return trajectory, ledger_path


def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    if args.seed is not None:
        config.seed = args.seed
    try:
        trajectory, ledger_path = _run_config(config, args.out)
    except StepError as err:
        print(f"solver failure at step {err.step}: {err.cause}", file=sys.stderr)
        return 3
    if trajectory.error is not None:
        step_idx, message = trajectory.error
        print(f"solver failure at step {step_idx}: {message}", file=sys.stderr)
        print(f"partial ledger written to {ledger_path}", file=sys.stderr)
        return 3
    print(f"ledger written to {ledger_path} ({len(trajectory.ledger)} rows)")
    return 0


def _sweep_cell(payload):
    index, text, axis, value, out_dir = payload
    row = {"index": index, "value": value, "status": "ok",
           "final_half_mass": "", "energy_margin": "", "h1_margin": "", "error": ""}
    try:
        pairs = parse_pairs(text)
        pairs[axis] = value
        config = parse_config("\n".join(f"{k} = {v}" for k, v in pairs.items()))
        cell_dir = os.path.join(out_dir, f"cell_{index:03d}")
        os.makedirs(cell_dir, exist_ok=True)
        trajectory, _ = _run_config(config, cell_dir)
        if trajectory.error is not None:
            row["status"] = "solver-failure"
            row["error"] = f"step {trajectory.error[0]}"
            return row
        cert = energy_balance(trajectory)
        row["final_half_mass"] = f"{trajectory.ledger.column('half_mass')[-1]:.16e}"
        row["energy_margin"] = f"{cert.worst_margin:.16e}"
        failed = not cert.passed
        if config.time.snapshot_every == 1:  # h1 needs every-step snapshots
            h1 = h1_apriori(trajectory, config.operator_spec())
            row["h1_margin"] = f"{h1.worst_margin:.16e}"
            failed = failed or not h1.passed
        if failed:
            row["status"] = "certificate-failure"
    except Exception as err:  # cell isolation: record and continue the sweep
        row["status"] = "error"
        row["error"] = str(err).splitlines()[0].replace(",", ";")
    return row


def cmd_sweep(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as f:
            text = f.read()
        parse_config(text)  # validate the template early
    except (OSError, ConfigError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    os.makedirs(args.out, exist_ok=True)
    payloads = [(i, text, args.axis, v, args.out) for i, v in enumerate(values)]
    workers = _worker_count()
    if workers == 1 or len(payloads) == 1:
        rows = [_sweep_cell(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, payloads))

    summary = os.path.join(args.out, "sweep.csv")
    with open(summary, "w", newline="\n") as f:
        f.write(f"{args.axis},status,final_half_mass,energy_margin,h1_margin,error\n")
        for row in rows:
            f.write(f"{row['value']},{row['status']},{row['final_half_mass']},"
                    f"{row['energy_margin']},{row['h1_margin']},{row['error']}\n")
    print(f"sweep summary written to {summary}")
    failures = [r for r in rows if r["status"] != "ok"]
    for row in failures:
        print(f"  cell {row['value']}: {row['status']} {row['error']}", file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    scale = args.scale if args.scale is not None else (0.01 if args.quick else 1.0)
    runner = SuiteRunner(seed=args.seed, scale=scale,
                         progress=(lambda msg: print(f"... {msg}", file=sys.stderr))
                         if args.verbose else None)
    certificates = runner.suite(args.suite)
    lines = [str(c) for c in certificates]
    for line in lines:
        print(line)
    if args.out:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
        with open(args.out, "w") as f:
            f.write("\n".join(lines) + "\n")
    return 0 if all(c.passed for c in certificates) else 1


def cmd_report(args) -> int:
    from .report import render_report

    try:
        written = render_report(args.ledger, args.out, snapshot_dir=args.snapshots)
    except (OSError, ValueError) as err:
        print(f"report error: {err}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cgl",
        description="Damped complex Ginzburg-Landau solver and certification harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-params", help="validate model coefficients")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_check_params)

    p = sub.add_parser("run", help="backward-Euler run with ledger and snapshots")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="independent runs along one config axis")
    p.add_argument("--config", required=True)
    p.add_argument("--axis", required=True, help="config key to vary, e.g. kernel.epsilon")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", default="sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run certificate suites")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=float, default=None,
                   help="sample-count multiplier (default 1.0)")
    p.add_argument("--quick", action="store_true", help="reduced sample counts")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--out", default=None, help="also write certificate lines to this file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="render ledger columns and figures")
    p.add_argument("--ledger", required=True)
    p.add_argument("--out", default="report")
    p.add_argument("--snapshots", default=None,
                   help="also render field profiles from this snapshot directory")
    p.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
