"""Spend-what-you-get baseline schedule and the evaluation metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import (
    EnergyProfile,
    InfeasibleScheduleError,
    Schedule,
    SystemParams,
    utility,
)

__all__ = ["MetricsReport", "sg_tdma_schedule", "jain_index", "improvement_metrics"]


@dataclass(frozen=True)
class MetricsReport:
    jain_index: float
    utility_improvement_pct: float
    per_user_throughput_improvement_pct: np.ndarray
    mean_path_loss_db: float


def sg_tdma_schedule(profile: EnergyProfile, users, params: SystemParams) -> Schedule:
    """Baseline: spend each slot's harvest in that slot, users rotate round-robin.

    Power is harvests/slot_lengths, so every cumulative energy constraint is
    tight.  Slot t goes entirely to user t mod N; with fewer slots than users
    somebody gets no airtime at all, which is rejected.
    """
    K = profile.num_slots
    N = len(users)
    if N < 1:
        raise ValueError("need at least one user")
    if K < N:
        raise InfeasibleScheduleError(
            f"TDMA over {K} slots starves users with {N} users"
        )
    p = profile.harvests / profile.slot_lengths
    tau = np.zeros((N, K))
    for t in range(K):
        tau[t % N, t] = profile.slot_lengths[t]
    return Schedule.build(p, tau, users, params)


def jain_index(x) -> float:
    """Fairness index (sum x)^2 / (n sum x^2); 1 iff all entries are equal."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("empty input")
    if np.any(x <= 0):
        raise ValueError("entries must be positive")
    return float(x.sum() ** 2 / (x.size * (x**2).sum()))


def improvement_metrics(
    candidate: Schedule, baseline: Schedule, users, params: SystemParams
) -> MetricsReport:
    """Utility and per-user throughput improvement of candidate over baseline.

    Throughput improvements are percentages of the baseline bits; a user that
    the baseline leaves at zero bits gets NaN there (and makes the utility
    improvement NaN too, since the baseline utility is undefined).  Utility
    improvement divides by |baseline utility| so its sign always matches the
    utility ordering.
    """
    cand_bits = candidate.user_bits
    base_bits = baseline.user_bits
    if cand_bits.size != base_bits.size:
        raise ValueError("schedules have different user counts")
    per_user = np.full(base_bits.size, np.nan)
    ok = base_bits > 0
    per_user[ok] = 100.0 * (cand_bits[ok] - base_bits[ok]) / base_bits[ok]

    if np.all(ok):
        u_c = utility(candidate, users, params)
        u_b = utility(baseline, users, params)
        utility_improvement = 100.0 * (u_c - u_b) / abs(u_b)
    else:
        utility_improvement = float("nan")

    return MetricsReport(
        jain_index=jain_index(cand_bits),
        utility_improvement_pct=float(utility_improvement),
        per_user_throughput_improvement_pct=per_user,
        mean_path_loss_db=float(np.mean([u.path_loss_db for u in users])),
    )
