"""Domain types, the rate/utility model, and feasibility checking.

A frame holds K slots; energy ``harvests[t]`` becomes available at the start
of slot ``t`` and slot ``t`` lasts ``slot_lengths[t]`` seconds.  A schedule
picks one transmit power per slot and splits each slot's duration among the
N downlink users.  The figure of merit is the sum of log2 of the per-user
bit totals, which is what makes the allocation proportionally fair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LN2 = math.log(2.0)

__all__ = [
    "DegenerateScheduleError",
    "InfeasibleScheduleError",
    "SystemParams",
    "UserChannel",
    "make_users",
    "EnergyProfile",
    "SolverOptions",
    "Schedule",
    "slot_rate",
    "rate_matrix",
    "utility_from_bits",
    "utility",
    "Violation",
    "FeasibilityReport",
    "check_feasible",
]


class DegenerateScheduleError(ValueError):
    """A user ends the frame with zero bits, so the log-utility is undefined."""


class InfeasibleScheduleError(ValueError):
    """Inputs violate a solver precondition (time budget, energy causality, ...)."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SystemParams:
    """Link bandwidth (Hz) and noise power spectral density (W/Hz)."""

    bandwidth_hz: float = 1000.0
    noise_density: float = 1e-6

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.noise_density <= 0:
            raise ValueError("noise_density must be positive")

    @property
    def noise_power(self) -> float:
        return self.noise_density * self.bandwidth_hz


@dataclass(frozen=True)
class UserChannel:
    """One user's channel: dB path loss, linear gain, and noise-normalized gain.

    ``norm_gain`` is gain / (noise_density * bandwidth), in 1/W; the rate in a
    slot with power p is bandwidth * log2(1 + norm_gain * p).
    """

    path_loss_db: float
    gain: float
    norm_gain: float

    def __post_init__(self):
        if self.gain <= 0:
            raise ValueError("gain must be positive")
        if self.norm_gain <= 0:
            raise ValueError("norm_gain must be positive")

    @classmethod
    def from_path_loss(cls, path_loss_db: float, params: SystemParams) -> "UserChannel":
        gain = 10.0 ** (-path_loss_db / 10.0)
        return cls(
            path_loss_db=float(path_loss_db),
            gain=gain,
            norm_gain=gain / params.noise_power,
        )


def make_users(path_losses_db, params: SystemParams) -> list[UserChannel]:
    """Build the user list from dB path losses (ordered strongest first or not)."""
    return [UserChannel.from_path_loss(pl, params) for pl in path_losses_db]


@dataclass(frozen=True)
class EnergyProfile:
    """Per-slot lengths (s) and harvested energies (J) for one frame."""

    slot_lengths: np.ndarray
    harvests: np.ndarray

    def __post_init__(self):
        T = _readonly(self.slot_lengths)
        E = _readonly(self.harvests)
        object.__setattr__(self, "slot_lengths", T)
        object.__setattr__(self, "harvests", E)
        if T.ndim != 1 or E.ndim != 1 or T.size != E.size:
            raise ValueError("slot_lengths and harvests must be 1-D of equal length")
        if T.size < 1:
            raise ValueError("need at least one slot")
        if np.any(T <= 0):
            raise ValueError("every slot length must be positive")
        if np.any(E < 0):
            raise ValueError("harvests must be nonnegative")
        if not np.any(E > 0):
            raise ValueError("at least one harvest must be positive")

    @property
    def num_slots(self) -> int:
        return int(self.slot_lengths.size)

    @property
    def frame_length(self) -> float:
        return float(self.slot_lengths.sum())

    def cumulative_energy(self) -> np.ndarray:
        return np.cumsum(self.harvests)


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances and iteration limits shared by the solvers.

    ``epsilon_time`` is the minimum total time each user must receive over
    the frame; ``None`` resolves to 1e-6 of the frame length, small enough
    never to bind at an interior optimum while still catching starvation.
    """

    epsilon_time: float | None = None
    utility_tol: float = 1e-9
    var_tol: float = 1e-7
    max_bcd_iters: int = 200
    barrier_weight0: float = 1.0
    barrier_growth: float = 10.0
    barrier_gap_tol: float = 1e-12
    newton_tol: float = 1e-10
    max_newton_iters: int = 100
    kkt_tol: float = 1e-6
    waterfill_tol: float = 1e-9
    waterfill_max_bisect: int = 200
    waterfill_bracket_tol: float = 1e-14
    time_block_tol: float = 1e-13
    time_block_max_sweeps: int = 20000
    time_feas_tol: float = 1e-8
    energy_feas_tol: float = 1e-6

    def __post_init__(self):
        for name in (
            "utility_tol", "var_tol", "barrier_weight0", "barrier_gap_tol",
            "newton_tol", "kkt_tol", "waterfill_tol", "waterfill_bracket_tol",
            "time_block_tol", "time_feas_tol", "energy_feas_tol",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epsilon_time is not None and self.epsilon_time <= 0:
            raise ValueError("epsilon_time must be positive")
        if self.barrier_growth <= 1:
            raise ValueError("barrier_growth must exceed 1")
        for name in ("max_bcd_iters", "max_newton_iters", "waterfill_max_bisect",
                     "time_block_max_sweeps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def resolve_epsilon(self, profile: EnergyProfile) -> float:
        if self.epsilon_time is not None:
            return self.epsilon_time
        return 1e-6 * profile.frame_length


@dataclass(frozen=True)
class Schedule:
    """A power vector (K,), a time-share matrix (N, K), and cached bit totals.

    Immutable after construction; ``user_bits`` is derived from the other two
    fields at build time and must stay consistent with them.
    """

    powers: np.ndarray
    time_alloc: np.ndarray
    user_bits: np.ndarray

    def __post_init__(self):
        p = _readonly(self.powers)
        tau = _readonly(self.time_alloc)
        bits = _readonly(self.user_bits)
        object.__setattr__(self, "powers", p)
        object.__setattr__(self, "time_alloc", tau)
        object.__setattr__(self, "user_bits", bits)
        if p.ndim != 1 or tau.ndim != 2 or bits.ndim != 1:
            raise ValueError("powers (K,), time_alloc (N,K), user_bits (N,) expected")
        if tau.shape[1] != p.size or tau.shape[0] != bits.size:
            raise ValueError(
                f"shape mismatch: powers {p.shape}, time_alloc {tau.shape}, "
                f"user_bits {bits.shape}"
            )

    @classmethod
    def build(cls, powers, time_alloc, users, params: SystemParams) -> "Schedule":
        """Construct a schedule, deriving the per-user bit totals."""
        powers = np.asarray(powers, dtype=float)
        time_alloc = np.asarray(time_alloc, dtype=float)
        rates = rate_matrix(users, powers, params)
        if time_alloc.shape != rates.shape:
            raise ValueError(
                f"time_alloc shape {time_alloc.shape} does not match "
                f"{len(users)} users x {powers.size} slots"
            )
        bits = (time_alloc * rates).sum(axis=1)
        return cls(powers=powers, time_alloc=time_alloc, user_bits=bits)

    @property
    def num_users(self) -> int:
        return int(self.time_alloc.shape[0])

    @property
    def num_slots(self) -> int:
        return int(self.powers.size)


def slot_rate(norm_gain: float, power: float, params: SystemParams) -> float:
    """Instantaneous rate bandwidth * log2(1 + norm_gain * power), in bits/s."""
    if norm_gain < 0:
        raise ValueError("norm_gain must be nonnegative")
    if power < 0:
        raise ValueError("power must be nonnegative")
    return params.bandwidth_hz * math.log2(1.0 + norm_gain * power)


def rate_matrix(users, powers: np.ndarray, params: SystemParams) -> np.ndarray:
    """N x K matrix of per-user per-slot rates for the given power vector."""
    powers = np.asarray(powers, dtype=float)
    if np.any(powers < 0):
        raise ValueError("powers must be nonnegative")
    gains = np.array([u.norm_gain for u in users])
    return params.bandwidth_hz * np.log2(1.0 + np.outer(gains, powers))


def utility_from_bits(bits) -> float:
    """Sum of log2 of per-user bit totals; the proportional-fairness objective."""
    bits = np.asarray(bits, dtype=float)
    if bits.size == 0:
        raise ValueError("no users")
    if np.any(bits <= 0):
        bad = np.nonzero(bits <= 0)[0]
        raise DegenerateScheduleError(
            f"users {bad.tolist()} have zero bits; log-utility is undefined"
        )
    return float(np.log2(bits).sum())


def utility(sched: Schedule, users, params: SystemParams) -> float:
    """Utility of a schedule, recomputed from its powers and time shares."""
    rates = rate_matrix(users, sched.powers, params)
    bits = (sched.time_alloc * rates).sum(axis=1)
    return utility_from_bits(bits)


@dataclass(frozen=True)
class Violation:
    kind: str
    index: tuple
    amount: float

    def __str__(self):
        return f"{self.kind}{list(self.index)}: violated by {self.amount:.3e}"


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0

    def __str__(self):
        if self.ok:
            return "feasible"
        return "; ".join(str(v) for v in self.violations)


def check_feasible(
    sched: Schedule,
    profile: EnergyProfile,
    opts: SolverOptions | None = None,
) -> FeasibilityReport:
    """Check all four constraint families and report every violation with its slack.

    The report is empty iff: powers and time shares are nonnegative, each
    slot's shares sum to its length (within ``time_feas_tol``), each user's
    total time meets the epsilon floor, and the cumulative energy spent never
    exceeds the cumulative energy harvested (within ``energy_feas_tol``).
    """
    opts = opts or SolverOptions()
    K = profile.num_slots
    if sched.num_slots != K:
        raise ValueError(f"schedule has {sched.num_slots} slots, profile has {K}")
    p = sched.powers
    tau = sched.time_alloc
    T = profile.slot_lengths
    eps = opts.resolve_epsilon(profile)

    violations = []
    for t in np.nonzero(p < -1e-12)[0]:
        violations.append(Violation("power_nonneg", (int(t),), float(-p[t])))
    for n, t in zip(*np.nonzero(tau < -1e-12)):
        violations.append(Violation("time_nonneg", (int(n), int(t)), float(-tau[n, t])))

    col_gap = tau.sum(axis=0) - T
    for t in np.nonzero(np.abs(col_gap) > opts.time_feas_tol)[0]:
        violations.append(Violation("time_budget", (int(t),), float(abs(col_gap[t]))))

    user_time = tau.sum(axis=1)
    for n in np.nonzero(user_time < eps - opts.time_feas_tol)[0]:
        violations.append(Violation("min_time", (int(n),), float(eps - user_time[n])))

    excess = np.cumsum(p * T) - profile.cumulative_energy()
    for t in np.nonzero(excess > opts.energy_feas_tol)[0]:
        violations.append(Violation("energy", (int(t),), float(excess[t])))

    return FeasibilityReport(violations=tuple(violations))
