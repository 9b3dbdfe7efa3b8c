"""Time subproblem: re-split one slot, or sweep all slots, at fixed powers.

For fixed powers each slot's problem is concave in that slot's N time shares
with a single budget constraint, so the optimum is a water-filling: shares
equalize the marginal utilities of everyone served, found by bisection on
the budget multiplier and finished exactly on the resulting active set.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import (
    EnergyProfile,
    Schedule,
    SolverOptions,
    SystemParams,
    rate_matrix,
)

log = logging.getLogger("ehsched.timealloc")

__all__ = ["SlotUpdate", "solve_time_slot", "full_time_pass", "utility_time_gradient"]


@dataclass(frozen=True)
class SlotUpdate:
    """Optimal shares for one slot and the multiplier on its time budget."""

    slot_index: int
    shares: np.ndarray
    multiplier: float


def utility_time_gradient(time_alloc, rates) -> np.ndarray:
    """Analytic gradient of the utility in the time shares: R_nt / (B_n ln2)."""
    tau = np.asarray(time_alloc, dtype=float)
    rates = np.asarray(rates, dtype=float)
    bits = (tau * rates).sum(axis=1)
    if np.any(bits <= 0):
        raise ValueError("gradient undefined: a user has zero bits")
    return rates / (bits[:, None] * kernels.LN2)


def solve_time_slot(
    t: int,
    sched: Schedule,
    profile: EnergyProfile,
    users,
    params: SystemParams,
    opts: SolverOptions | None = None,
) -> SlotUpdate:
    """Optimal re-split of slot t's budget with everything else held fixed.

    Does not modify the schedule; the caller commits the returned shares.
    The objective value of the new column is never below the incoming one.
    """
    opts = opts or SolverOptions()
    K = profile.num_slots
    if not 0 <= t < K:
        raise ValueError(f"slot index {t} out of range for {K} slots")
    budget = float(profile.slot_lengths[t])
    if budget <= 0:
        raise ValueError("slot length must be positive")
    rates = rate_matrix(users, sched.powers, params)
    bits = (sched.time_alloc * rates).sum(axis=1)
    fixed_bits = bits - sched.time_alloc[:, t] * rates[:, t]
    shares, mu = kernels.slot_shares(
        fixed_bits,
        np.ascontiguousarray(rates[:, t]),
        budget,
        opts.waterfill_max_bisect,
        opts.waterfill_bracket_tol,
    )
    return SlotUpdate(slot_index=t, shares=shares, multiplier=float(mu))


def _watch_airtime_floor(tau, profile, opts):
    eps = opts.resolve_epsilon(profile)
    user_time = tau.sum(axis=1)
    close = np.nonzero(user_time < 10.0 * eps)[0]
    if close.size:
        log.warning(
            "users %s are within 10x of the airtime floor %.3e",
            close.tolist(),
            eps,
        )


def full_time_pass(
    sched: Schedule,
    profile: EnergyProfile,
    users,
    params: SystemParams,
    opts: SolverOptions | None = None,
) -> Schedule:
    """Sweep slots in ascending order, committing each column before the next.

    Utility is non-decreasing at every commit.  The frame-level airtime floor
    couples slots and is not enforced per column; it is vacuous whenever every
    user has a positive-rate slot, so it is only watched and warned about.
    """
    opts = opts or SolverOptions()
    rates = rate_matrix(users, sched.powers, params)
    tau = sched.time_alloc.copy()
    bits = (tau * rates).sum(axis=1)
    kernels.time_sweep(tau, rates, profile.slot_lengths, bits)
    _watch_airtime_floor(tau, profile, opts)
    return Schedule.build(sched.powers, tau, users, params)


def solve_time_block(
    sched: Schedule,
    profile: EnergyProfile,
    users,
    params: SystemParams,
    opts: SolverOptions | None = None,
) -> Schedule:
    """Solve the whole time allocation for fixed powers.

    Repeats column sweeps until the bit totals stop moving, which drives the
    jointly concave time problem to a block optimum rather than stopping
    after one pass.
    """
    opts = opts or SolverOptions()
    rates = rate_matrix(users, sched.powers, params)
    tau = sched.time_alloc.copy()
    kernels.time_fixed_point(
        tau, rates, profile.slot_lengths, opts.time_block_tol,
        opts.time_block_max_sweeps,
    )
    _watch_airtime_floor(tau, profile, opts)
    return Schedule.build(sched.powers, tau, users, params)
