"""Independent brute-force and numerical-analysis oracles.

These deliberately avoid the production solvers' machinery: the grid oracle
enumerates power vectors exhaustively and the probes work from function
values only, so they can vouch for the solvers rather than echo them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import EnergyProfile, Schedule, SolverOptions, SystemParams
from .power import utility_power_gradient

__all__ = [
    "GridOracleResult",
    "grid_global_optimum",
    "finite_diff_gradient",
    "ProbeResult",
    "concavity_probe",
]


@dataclass(frozen=True)
class GridOracleResult:
    """Best grid point, a first-order bound on what the grid can miss, and the
    polished value obtained by running the alternating solver from that point."""

    utility: float
    schedule: Schedule
    resolution_bound: float
    refined_utility: float | None


def grid_global_optimum(
    profile: EnergyProfile,
    users,
    params: SystemParams,
    step: float,
    refine: bool = True,
    opts: SolverOptions | None = None,
) -> GridOracleResult:
    """Exhaustive search over the energy-feasible power grid (N <= 3, K <= 3).

    For every grid power vector the time allocation is driven to a fixed
    point of per-slot re-splits, so the returned utility is a lower bound on
    the global optimum with a gap controlled by the grid resolution.  The
    reported ``resolution_bound`` is the first-order estimate
    step * ||power gradient at the best point||_1 plus a small slack for the
    fixed-point tolerance.
    """
    K = profile.num_slots
    N = len(users)
    if K > 3 or N > 3:
        raise ValueError(f"instance too large for the grid oracle: N={N}, K={K}")
    if step <= 0:
        raise ValueError("step must be positive")
    gains = np.array([u.norm_gain for u in users])
    best_u, best_p, best_tau = kernels.grid_search(
        profile.slot_lengths,
        profile.cumulative_energy(),
        gains,
        params.bandwidth_hz,
        step,
        1e-10,
        2000,
    )
    sched = Schedule.build(best_p, best_tau, users, params)
    grad = utility_power_gradient(best_p, best_tau, users, params)
    bound = step * float(np.abs(grad).sum()) + 1e-6

    refined = None
    if refine:
        from .bcd import run_bcd  # local import; bcd does not need the oracle

        report = run_bcd(profile, users, params, opts=opts, initial=sched)
        refined = float(report.utility_trace[-1])
    return GridOracleResult(
        utility=float(best_u),
        schedule=sched,
        resolution_bound=float(bound),
        refined_utility=refined,
    )


def finite_diff_gradient(f, x, h) -> np.ndarray:
    """Central-difference gradient of a scalar field at x.

    ``h`` may be a scalar or a per-coordinate array of step sizes.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
    grad = np.zeros(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h[i]
        grad[i] = (f(x + e) - f(x - e)) / (2.0 * h[i])
    return grad


@dataclass(frozen=True)
class ProbeResult:
    passed: bool
    worst_violation: float
    trials: int


def concavity_probe(
    f,
    sampler,
    trials: int,
    mode: str = "concave",
    tol: float = 1e-9,
    seed: int = 0,
) -> ProbeResult:
    """Sample interpolation inequalities for concavity (or equalities for affinity).

    Draws pairs of points from ``sampler(rng)`` and a uniform interpolation
    weight; records the worst violation of
    f(lerp) >= lerp of f (concave) or |f(lerp) - lerp of f| = 0 (affine).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if mode not in ("concave", "affine"):
        raise ValueError("mode must be 'concave' or 'affine'")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x1 = np.asarray(sampler(rng), dtype=float)
        x2 = np.asarray(sampler(rng), dtype=float)
        lam = rng.uniform()
        interp = lam * f(x1) + (1.0 - lam) * f(x2)
        actual = f(lam * x1 + (1.0 - lam) * x2)
        if mode == "concave":
            violation = interp - actual
        else:
            violation = abs(actual - interp)
        worst = max(worst, float(violation))
    return ProbeResult(passed=worst <= tol, worst_violation=worst, trials=trials)
