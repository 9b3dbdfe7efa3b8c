import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ehsched import kernels, run_bcd, sg_tdma_schedule
from ehsched.scenarios import TABLE1_SEQUENCES, builtin_scenarios


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # trigger any jit compilation before timed tests run
    c = np.array([0.0, 1.0])
    r = np.array([1.0, 1.0])
    kernels.slot_shares(c, r, 1.0, 50, 1e-12)
    tau = np.full((2, 2), 0.5)
    rates = np.ones((2, 2))
    T = np.ones(2)
    bits = (tau * rates).sum(axis=1)
    kernels.time_sweep(tau, rates, T, bits)
    kernels.time_fixed_point(tau, rates, T, 1e-10, 50)
    kernels.grid_search(T, np.cumsum(np.ones(2)), np.array([1.0]), 1.0, 0.5, 1e-10, 100)


@pytest.fixture(scope="session")
def table1_runs(warm_kernels):
    """BCD results for the four benchmark slot sequences, solved once."""
    out = {}
    for key in TABLE1_SEQUENCES:
        scenario = builtin_scenarios()[f"table1-{key}"]
        users = scenario.users()
        t0 = time.perf_counter()
        report = run_bcd(scenario.profile, users, scenario.params)
        runtime = time.perf_counter() - t0
        out[key] = {
            "scenario": scenario,
            "users": users,
            "report": report,
            "runtime": runtime,
            "baseline": sg_tdma_schedule(scenario.profile, users, scenario.params),
        }
    return out


@pytest.fixture()
def s1tilde():
    scenario = builtin_scenarios()["table1-s1tilde"]
    return scenario, scenario.users()
