"""Proportionally fair power/time scheduling for an energy-harvesting downlink.

The solver alternates two convex blocks: an exact power allocation for fixed
time shares (barrier + Newton) and closed-form water-filling time splits for
fixed powers.  Baselines, fairness metrics, brute-force oracles, and a CLI
that rebuilds the bundled benchmark CSVs round out the package.
"""

from .bcd import (
    BcdReport,
    PartialOptimumCertificate,
    energy_exhaustion_check,
    random_feasible_schedule,
    run_bcd,
    verify_partial_optimum,
)
from .kernels import USING_NUMBA
from .metrics import MetricsReport, improvement_metrics, jain_index, sg_tdma_schedule
from .model import (
    DegenerateScheduleError,
    EnergyProfile,
    FeasibilityReport,
    InfeasibleScheduleError,
    Schedule,
    SolverOptions,
    SystemParams,
    UserChannel,
    check_feasible,
    make_users,
    rate_matrix,
    slot_rate,
    utility,
    utility_from_bits,
)
from .oracle import (
    GridOracleResult,
    ProbeResult,
    concavity_probe,
    finite_diff_gradient,
    grid_global_optimum,
)
from .power import (
    PowerSolution,
    interior_start,
    kkt_residual_power,
    solve_power,
    utility_power_gradient,
    utility_power_hessian,
)
from .scenarios import Scenario, ScenarioError, builtin_scenarios, load_scenario
from .timealloc import SlotUpdate, full_time_pass, solve_time_slot, utility_time_gradient

__version__ = "0.1.0"

__all__ = [
    "BcdReport",
    "PartialOptimumCertificate",
    "energy_exhaustion_check",
    "random_feasible_schedule",
    "run_bcd",
    "verify_partial_optimum",
    "USING_NUMBA",
    "MetricsReport",
    "improvement_metrics",
    "jain_index",
    "sg_tdma_schedule",
    "DegenerateScheduleError",
    "EnergyProfile",
    "FeasibilityReport",
    "InfeasibleScheduleError",
    "Schedule",
    "SolverOptions",
    "SystemParams",
    "UserChannel",
    "check_feasible",
    "make_users",
    "rate_matrix",
    "slot_rate",
    "utility",
    "utility_from_bits",
    "GridOracleResult",
    "ProbeResult",
    "concavity_probe",
    "finite_diff_gradient",
    "grid_global_optimum",
    "PowerSolution",
    "interior_start",
    "kkt_residual_power",
    "solve_power",
    "utility_power_gradient",
    "utility_power_hessian",
    "Scenario",
    "ScenarioError",
    "builtin_scenarios",
    "load_scenario",
    "SlotUpdate",
    "full_time_pass",
    "solve_time_slot",
    "utility_time_gradient",
    "__version__",
]
