"""Power subproblem: maximize utility over per-slot powers for fixed time shares.

With the time shares fixed and every user given some airtime, the objective
is strictly concave in the power vector, so the maximizer under the
cumulative-energy and nonnegativity constraints is unique.  It is found by a
sequence of unconstrained maximizations: a logarithmic barrier on all
constraints whose weight shrinks geometrically, each centered with damped
Newton steps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .model import (
    LN2,
    DegenerateScheduleError,
    EnergyProfile,
    InfeasibleScheduleError,
    SolverOptions,
    SystemParams,
)

log = logging.getLogger("ehsched.power")

__all__ = [
    "PowerSolution",
    "solve_power",
    "kkt_residual_power",
    "utility_power_gradient",
    "utility_power_hessian",
    "interior_start",
]


@dataclass(frozen=True)
class PowerSolution:
    powers: np.ndarray
    kkt_residual: float
    inner_iterations: int
    converged: bool


def _gains(users) -> np.ndarray:
    return np.array([u.norm_gain for u in users])


def utility_power_gradient(powers, time_alloc, users, params) -> np.ndarray:
    """Analytic gradient of the utility in the power vector.

    Component t is sum_n tau[n,t] * W*L_n / ((1 + L_n p_t) * ln2) / (B_n * ln2)
    with B_n the bit total of user n.
    """
    p = np.asarray(powers, dtype=float)
    tau = np.asarray(time_alloc, dtype=float)
    L = _gains(users)
    W = params.bandwidth_hz
    z = 1.0 + np.outer(L, p)
    bits = (tau * (W * np.log2(z))).sum(axis=1)
    if np.any(bits <= 0):
        raise DegenerateScheduleError("gradient undefined: a user has zero bits")
    drate = (W / LN2) * L[:, None] / z
    return ((tau * drate) / bits[:, None]).sum(axis=0) / LN2


def utility_power_hessian(powers, time_alloc, users, params) -> np.ndarray:
    """Analytic Hessian of the utility in the power vector (K x K)."""
    p = np.asarray(powers, dtype=float)
    tau = np.asarray(time_alloc, dtype=float)
    L = _gains(users)
    W = params.bandwidth_hz
    z = 1.0 + np.outer(L, p)
    bits = (tau * (W * np.log2(z))).sum(axis=1)
    if np.any(bits <= 0):
        raise DegenerateScheduleError("hessian undefined: a user has zero bits")
    drate = (W / LN2) * L[:, None] / z
    d2rate = -(W / LN2) * (L**2)[:, None] / z**2
    M = (tau * drate) / bits[:, None]
    diag = ((tau * d2rate) / bits[:, None]).sum(axis=0)
    return (np.diag(diag) - M.T @ M) / LN2


def interior_start(profile: EnergyProfile) -> np.ndarray:
    """A power vector strictly inside every constraint that can be strict.

    Spend-what-you-get scaled by one half when every harvest is positive;
    otherwise spend half of whatever is currently available in each slot,
    which stays strictly interior past any leading slots with no energy yet.
    """
    T = profile.slot_lengths
    E = profile.harvests
    if np.all(E > 0):
        return 0.5 * E / T
    cum_e = profile.cumulative_energy()
    p = np.zeros(profile.num_slots)
    spent = 0.0
    for t in range(profile.num_slots):
        p[t] = 0.5 * (cum_e[t] - spent) / T[t]
        spent += p[t] * T[t]
    return p


def solve_power(
    time_alloc,
    profile: EnergyProfile,
    users,
    params: SystemParams,
    opts: SolverOptions | None = None,
    start=None,
) -> PowerSolution:
    """Solve the fixed-time power allocation to its unique optimum.

    Requires the time matrix to satisfy the slot budgets and give every user
    at least the epsilon airtime floor.  The returned powers are feasible,
    exhaust the frame's energy (final cumulative constraint tight), and carry
    the stationarity residual from :func:`kkt_residual_power`.  ``start``
    optionally overrides the interior starting point; it must be strictly
    feasible.
    """
    opts = opts or SolverOptions()
    tau = np.asarray(time_alloc, dtype=float)
    K = profile.num_slots
    N = len(users)
    if tau.shape != (N, K):
        raise ValueError(f"time_alloc shape {tau.shape}, expected ({N}, {K})")
    T = profile.slot_lengths
    col_gap = np.abs(tau.sum(axis=0) - T)
    if np.any(tau < -1e-12) or np.any(col_gap > max(opts.time_feas_tol, 1e-7)):
        raise InfeasibleScheduleError("time matrix violates the slot budgets")
    eps = opts.resolve_epsilon(profile)
    user_time = tau.sum(axis=1)
    if np.any(user_time < eps):
        starving = np.nonzero(user_time < eps)[0]
        raise InfeasibleScheduleError(
            f"users {starving.tolist()} fall below the airtime floor {eps:.3e}"
        )

    cum_e = profile.cumulative_energy()
    free = cum_e > 0  # leading slots with no energy yet force p = 0
    if np.any(tau[:, free].sum(axis=1) <= 0):
        raise DegenerateScheduleError(
            "a user has airtime only in slots that cannot carry power"
        )
    L = _gains(users)
    W = params.bandwidth_hz
    idx = np.nonzero(free)[0]
    T_f = T[idx]
    cum_f = cum_e[idx]
    tau_f = tau[:, idx]
    nf = idx.size
    pair_idx = np.maximum.outer(np.arange(nf), np.arange(nf))

    def phi(x, mu):
        slack = cum_f - np.cumsum(x * T_f)
        if np.any(slack <= 0) or np.any(x <= 0):
            return -np.inf
        bits = (tau_f * (W * np.log2(1.0 + np.outer(L, x)))).sum(axis=1)
        if np.any(bits <= 0):
            return -np.inf
        return float(
            np.log2(bits).sum() + mu * (np.log(slack).sum() + np.log(x).sum())
        )

    def grad_hess(x, mu):
        z = 1.0 + np.outer(L, x)
        bits = (tau_f * (W * np.log2(z))).sum(axis=1)
        drate = (W / LN2) * L[:, None] / z
        d2rate = -(W / LN2) * (L**2)[:, None] / z**2
        M = (tau_f * drate) / bits[:, None]
        g = M.sum(axis=0) / LN2
        H = (np.diag(((tau_f * d2rate) / bits[:, None]).sum(axis=0)) - M.T @ M) / LN2
        slack = cum_f - np.cumsum(x * T_f)
        inv = 1.0 / slack
        rev = np.cumsum(inv[::-1])[::-1]
        g = g - mu * T_f * rev + mu / x
        inv2 = np.cumsum((inv**2)[::-1])[::-1]
        H = H - mu * np.outer(T_f, T_f) * inv2[pair_idx] - mu * np.diag(1.0 / x**2)
        return g, H

    def max_step(x, d):
        """Largest step keeping x and all cumulative-energy slacks positive."""
        alpha = 1.0
        neg = d < 0
        if np.any(neg):
            alpha = min(alpha, 0.99 * float(np.min(x[neg] / -d[neg])))
        slack = cum_f - np.cumsum(x * T_f)
        cum_dT = np.cumsum(d * T_f)
        pos = cum_dT > 0
        if np.any(pos):
            alpha = min(alpha, 0.99 * float(np.min(slack[pos] / cum_dT[pos])))
        return alpha

    if start is None:
        x = interior_start(profile)[idx]
    else:
        x = np.asarray(start, dtype=float)[idx].copy()
        if phi(x, 1.0) == -np.inf:
            raise ValueError("start must be strictly feasible")

    mu = opts.barrier_weight0
    n_cons = 2 * nf
    total_newton = 0
    newton_ok = True
    for round_no in range(200):
        x, used, ok = _newton_center(x, mu, phi, grad_hess, max_step, opts)
        total_newton += used
        newton_ok = ok
        bits = (tau_f * (W * np.log2(1.0 + np.outer(L, x)))).sum(axis=1)
        u_now = float(np.log2(bits).sum())
        log.debug("barrier round %d: mu=%.3e U=%.9f newton_steps=%d",
                  round_no, mu, u_now, used)
        if n_cons * mu < opts.barrier_gap_tol * max(1.0, abs(u_now)):
            break
        mu /= opts.barrier_growth

    p = np.zeros(K)
    p[idx] = x
    # the objective rises in every power, so the optimum exhausts the frame's
    # energy; hand any barrier-induced slack to the last slot
    final_slack = cum_e[-1] - float(np.sum(p * T))
    if final_slack > 0:
        p[-1] += final_slack / T[-1]
    p = np.maximum(p, 0.0)

    kkt = kkt_residual_power(p, tau, profile, users, params)
    return PowerSolution(
        powers=p,
        kkt_residual=kkt,
        inner_iterations=total_newton,
        converged=bool(newton_ok and kkt <= opts.kkt_tol),
    )


def _newton_center(x, mu, phi, grad_hess, max_step, opts):
    """Damped Newton ascent on the barrier objective at fixed weight mu."""
    converged = False
    used = 0
    f0 = phi(x, mu)
    for _ in range(opts.max_newton_iters):
        g, H = grad_hess(x, mu)
        try:
            d = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            d = g.copy()
        slope = float(g @ d)
        if slope <= 0:  # not an ascent direction; fall back to the gradient
            d = g.copy()
            slope = float(g @ g)
        if 0.5 * slope <= opts.newton_tol * max(1.0, abs(f0)):
            converged = True
            break
        used += 1
        alpha = max_step(x, d)
        improved = False
        for _ in range(60):
            f1 = phi(x + alpha * d, mu)
            if f1 > -np.inf and f1 >= f0 + 1e-4 * alpha * slope:
                x = x + alpha * d
                f0 = f1
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
    return x, used, converged


def kkt_residual_power(
    powers,
    time_alloc,
    profile: EnergyProfile,
    users,
    params: SystemParams,
    comp_tol: float = 1e-6,
) -> float:
    """Stationarity residual of a feasible power vector.

    Fits nonnegative multipliers on the constraint normals (cumulative energy
    rows and power-nonnegativity rows) to the utility gradient by nonnegative
    least squares, then enforces complementary slackness: normals whose
    fitted multiplier times slack is macroscopic are not really active and
    are dropped before refitting.  The returned 2-norm of the unfittable
    gradient part is zero at the exact optimum.  Activity is decided by the
    complementarity products rather than a slack threshold because weakly
    active constraints (tiny multiplier) keep a macroscopic slack at any
    barrier iterate.
    """
    p = np.asarray(powers, dtype=float)
    K = profile.num_slots
    T = profile.slot_lengths
    cum_e = profile.cumulative_energy()
    slack = np.concatenate([cum_e - np.cumsum(p * T), p])

    g = utility_power_gradient(p, time_alloc, users, params)
    bits = (np.asarray(time_alloc) * (params.bandwidth_hz * np.log2(
        1.0 + np.outer([u.norm_gain for u in users], p)))).sum(axis=1)
    scale = max(1.0, abs(float(np.log2(bits).sum())))

    normals = np.zeros((K, 2 * K))
    for t in range(K):
        normals[: t + 1, t] = T[: t + 1]
        normals[t, K + t] = -1.0

    keep = np.ones(2 * K, dtype=bool)
    rnorm = float(np.linalg.norm(g))
    for _ in range(2 * K):
        if not np.any(keep):
            rnorm = float(np.linalg.norm(g))
            break
        lam_kept, rnorm = nnls(normals[:, keep], g)
        lam = np.zeros(2 * K)
        lam[keep] = lam_kept
        violating = keep & (lam * slack > comp_tol * scale)
        if not np.any(violating):
            break
        keep &= ~violating
    return float(rnorm)
