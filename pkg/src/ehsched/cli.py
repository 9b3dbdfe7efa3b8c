"""Command-line interface: solve scenario files and rebuild the benchmark CSVs.

Subcommands:
  run <scenario> [--out DIR] [--seed N] [--multistart N]
      Solve one scenario (a JSON file or a built-in name) and write
      schedule.csv, trace.csv and metrics.csv.
  reproduce <table1|table2|sweep-users> [--out DIR]
      Re-run a built-in experiment suite and write its CSV bundle.
  oracle <scenario> [--step S]
      Exhaustive grid search on a small instance (N <= 3, K <= 3).

Exit codes: 0 success, 1 input error, 2 solver hit the iteration cap.
The EH_SCHED_LOG environment variable sets the log level (e.g. DEBUG, INFO).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .bcd import run_bcd
from .metrics import improvement_metrics, jain_index, sg_tdma_schedule
from .model import utility
from .oracle import grid_global_optimum
from .scenarios import (
    SWEEP_CASES,
    TABLE1_REFERENCE,
    TABLE1_SEQUENCES,
    TABLE2_ROWS,
    Scenario,
    ScenarioError,
    builtin_scenarios,
    load_scenario,
    sweep_user_scenario,
)

log = logging.getLogger("ehsched.cli")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.6g}"


def _write_csv(path: Path, rows) -> None:
    """Write rows (lists of already-formatted cells) atomically."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(",".join(str(c) for c in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_scenario(spec: str) -> Scenario:
    builtins = builtin_scenarios()
    if spec in builtins:
        return builtins[spec]
    if Path(spec).exists():
        return load_scenario(spec)
    raise ScenarioError(
        f"{spec!r} is neither a readable file nor a built-in scenario "
        f"(built-ins: {', '.join(sorted(builtins))})"
    )


def _cmd_run(args) -> int:
    try:
        scenario = _resolve_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return 1
    users = scenario.users()
    profile = scenario.profile
    params = scenario.params

    report = run_bcd(
        profile, users, params,
        opts=scenario.solver,
        multistart=args.multistart,
        seed=args.seed,
    )
    sched = report.schedule
    baseline = sg_tdma_schedule(profile, users, params)
    metrics = improvement_metrics(sched, baseline, users, params)

    out = Path(args.out)
    K = profile.num_slots
    sched_rows = [["p"] + [_fmt(v) for v in sched.powers]]
    for n in range(sched.num_users):
        sched_rows.append([f"tau_{n + 1}"] + [_fmt(v) for v in sched.time_alloc[n]])
    _write_csv(out / "schedule.csv", sched_rows)

    # one trace row per outer iteration: entries 0, 2, 4, ... of the
    # per-block-step trace are the start and each iteration's end
    trace_rows = [["iter", "utility"]]
    outer = report.utility_trace[0::2]
    for i, u in enumerate(outer):
        trace_rows.append([i, _fmt(u)])
    _write_csv(out / "trace.csv", trace_rows)

    final_u = float(report.utility_trace[-1])
    try:
        base_u = utility(baseline, users, params)
        base_jain = jain_index(baseline.user_bits)
    except ValueError:  # baseline starves a user; improvements are undefined
        base_u = float("nan")
        base_jain = float("nan")
    metric_rows = [
        ["metric", "value"],
        ["utility", _fmt(final_u)],
        ["baseline_utility", _fmt(base_u)],
        ["utility_improvement_pct", _fmt(metrics.utility_improvement_pct)],
        ["jain", _fmt(metrics.jain_index)],
        ["jain_baseline", _fmt(base_jain)],
        ["mean_path_loss_db", _fmt(metrics.mean_path_loss_db)],
        ["iterations", report.iterations],
        ["converged", int(report.converged)],
    ]
    for n, bits in enumerate(sched.user_bits):
        metric_rows.append([f"bits_user_{n + 1}", _fmt(bits)])
    _write_csv(out / "metrics.csv", metric_rows)

    print(f"{scenario.name}: utility {final_u:.6f} "
          f"({report.iterations} iterations, converged={report.converged})")
    if not report.converged:
        return 2
    return 0


def _cmd_reproduce(args) -> int:
    out = Path(args.out)
    if args.suite == "table1":
        rows = [["sequence", "utility", "improvement_pct", "iterations",
                 "ref_utility", "ref_improvement_pct"]]
        for key in TABLE1_SEQUENCES:
            scenario = builtin_scenarios()[f"table1-{key}"]
            users = scenario.users()
            report = run_bcd(scenario.profile, users, scenario.params,
                             opts=scenario.solver)
            baseline = sg_tdma_schedule(scenario.profile, users, scenario.params)
            m = improvement_metrics(report.schedule, baseline, users, scenario.params)
            ref_u, ref_imp, _ = TABLE1_REFERENCE[key]
            rows.append([key, _fmt(report.utility_trace[-1]),
                         _fmt(m.utility_improvement_pct), report.iterations,
                         _fmt(ref_u), _fmt(ref_imp)])
            log.info("table1 %s done", key)
        _write_csv(out / "table1.csv", rows)
        print(f"wrote {out / 'table1.csv'}")
    elif args.suite == "table2":
        rows = [["row", "num_harvests", "improvement_pct", "ref_improvement_pct"]]
        for i, (harvests, ref_imp) in enumerate(TABLE2_ROWS):
            scenario = builtin_scenarios()[f"table2-r{i + 1}"]
            users = scenario.users()
            report = run_bcd(scenario.profile, users, scenario.params,
                             opts=scenario.solver)
            baseline = sg_tdma_schedule(scenario.profile, users, scenario.params)
            m = improvement_metrics(report.schedule, baseline, users, scenario.params)
            rows.append([f"r{i + 1}", len(harvests),
                         _fmt(m.utility_improvement_pct), _fmt(ref_imp)])
            log.info("table2 row %d done", i + 1)
        _write_csv(out / "table2.csv", rows)
        print(f"wrote {out / 'table2.csv'}")
    else:  # sweep-users
        rows = [["case", "n_users", "utility_bcd", "utility_sg_tdma",
                 "improvement_pct", "jain_bcd", "jain_sg_tdma"]]
        for case in SWEEP_CASES:
            for n_users in range(2, 9):
                scenario = sweep_user_scenario(case, n_users)
                users = scenario.users()
                report = run_bcd(scenario.profile, users, scenario.params,
                                 opts=scenario.solver)
                baseline = sg_tdma_schedule(scenario.profile, users, scenario.params)
                m = improvement_metrics(report.schedule, baseline, users,
                                        scenario.params)
                rows.append([
                    case, n_users,
                    _fmt(report.utility_trace[-1]),
                    _fmt(utility(baseline, users, scenario.params)),
                    _fmt(m.utility_improvement_pct),
                    _fmt(m.jain_index),
                    _fmt(jain_index(baseline.user_bits)),
                ])
                log.info("sweep case %s n=%d done", case, n_users)
        _write_csv(out / "sweep_users.csv", rows)
        print(f"wrote {out / 'sweep_users.csv'}")
    return 0


def _cmd_oracle(args) -> int:
    try:
        scenario = _resolve_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"error: {args.scenario}: {exc}", file=sys.stderr)
        return 1
    users = scenario.users()
    profile = scenario.profile
    if args.step is None:
        peak = float(np.max(profile.cumulative_energy() / profile.slot_lengths))
        step = peak / 100.0
    else:
        step = args.step
    try:
        result = grid_global_optimum(profile, users, scenario.params, step=step)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"grid utility  : {result.utility:.9f}")
    print(f"grid powers   : {np.array2string(result.schedule.powers, precision=6)}")
    print(f"bound         : {result.resolution_bound:.3e}")
    print(f"refined       : {result.refined_utility:.9f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehsched",
        description="Proportionally fair power/time scheduling for an "
                    "energy-harvesting downlink",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve one scenario and write CSVs")
    p_run.add_argument("scenario", help="scenario JSON file or built-in name")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--seed", type=int, default=0, help="multistart seed")
    p_run.add_argument("--multistart", type=int, default=0,
                       help="extra random feasible starts")
    p_run.set_defaults(func=_cmd_run)

    p_rep = sub.add_parser("reproduce", help="re-run a built-in experiment suite")
    p_rep.add_argument("suite", choices=["table1", "table2", "sweep-users"])
    p_rep.add_argument("--out", default=".", help="output directory")
    p_rep.set_defaults(func=_cmd_reproduce)

    p_or = sub.add_parser("oracle", help="grid-search a small instance")
    p_or.add_argument("scenario", help="scenario JSON file or built-in name")
    p_or.add_argument("--step", type=float, default=None, help="power grid step (W)")
    p_or.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("EH_SCHED_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
