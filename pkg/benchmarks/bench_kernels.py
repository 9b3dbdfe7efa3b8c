#!/usr/bin/env python3
"""Benchmark the hot kernels on the jitted path vs the pure-numpy fallback.

Runs itself twice in subprocesses (with and without EH_SCHED_NO_NUMBA=1) and
prints a timing table.  Compilation time is excluded by warming each kernel
before measurement.

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def workloads():
    from ehsched import kernels, run_bcd
    from ehsched.scenarios import builtin_scenarios

    rng = np.random.default_rng(0)
    N, K = 5, 10
    rates = rng.uniform(100.0, 5000.0, (N, K))
    T = np.full(K, 10.0)

    def bench_slot_waterfill():
        c = rng.uniform(0.0, 1e5, N)
        col = np.ascontiguousarray(rates[:, 0])
        for _ in range(30000):
            kernels.slot_shares(c, col, 10.0, 200, 1e-14)

    def bench_time_block():
        for _ in range(300):
            tau = np.tile(T / N, (N, 1))
            kernels.time_fixed_point(tau, rates, T, 1e-13, 20000)

    def bench_grid_oracle():
        slot_lengths = np.array([1.0, 1.0])
        cum_e = np.cumsum([2.0, 2.0])
        gains = np.array([1.0, 0.4])
        kernels.grid_search(slot_lengths, cum_e, gains, 1.0, 0.01, 1e-10, 2000)

    def bench_bcd_scenario():
        scenario = builtin_scenarios()["table1-s1tilde"]
        run_bcd(scenario.profile, scenario.users(), scenario.params)

    return {
        "slot-waterfill x30k": bench_slot_waterfill,
        "time-block x300": bench_time_block,
        "grid-oracle K=2": bench_grid_oracle,
        "bcd s1tilde": bench_bcd_scenario,
    }


def run_child(repeats):
    from ehsched import USING_NUMBA

    results = {"using_numba": USING_NUMBA}
    for name, fn in workloads().items():
        fn()  # warm-up (jit compilation and caches)
        best = min(_timed(fn) for _ in range(repeats))
        results[name] = best
    print(json.dumps(results))


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def spawn(disable_numba, repeats):
    env = dict(os.environ)
    env.pop("EH_SCHED_NO_NUMBA", None)
    if disable_numba:
        env["EH_SCHED_NO_NUMBA"] = "1"
    out = subprocess.run(
        [sys.executable, __file__, "--child", "--repeats", str(repeats)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--child", action="store_true")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    if args.child:
        run_child(args.repeats)
        return

    print("timing the numba path ...")
    jit = spawn(disable_numba=False, repeats=args.repeats)
    print("timing the pure-numpy fallback (EH_SCHED_NO_NUMBA=1) ...")
    plain = spawn(disable_numba=True, repeats=args.repeats)
    if not jit.pop("using_numba"):
        print("warning: numba unavailable; both columns ran the fallback")
    plain.pop("using_numba")

    width = max(len(k) for k in jit)
    print(f"\n{'workload':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, t_jit in jit.items():
        t_plain = plain[name]
        print(f"{name:<{width}}  {t_jit:>9.4f}s  {t_plain:>9.4f}s  {t_plain / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
