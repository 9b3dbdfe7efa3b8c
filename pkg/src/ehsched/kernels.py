"""Hot numeric kernels.

The functions here are compiled with numba's @njit by default.  Set
``EH_SCHED_NO_NUMBA=1`` in the environment to run the identical pure-numpy
code paths instead (slower, no compilation step).  ``USING_NUMBA`` reports
which path is active; ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

import numpy as np

LN2 = 0.6931471805599453


def numba_disabled_by_env() -> bool:
    return os.environ.get("EH_SCHED_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")


def _py_slot_shares(current_bits, rates, budget, max_bisect, bracket_tol):
    """Split one slot's time budget across users by water-filling.

    current_bits[i] is user i's bit total excluding this slot, rates[i] its
    rate in the slot.  Returns (shares, mu) where mu is the multiplier on the
    slot budget: every positive share has marginal utility exactly mu, every
    zero share has marginal <= mu.  A slot where nobody has a positive rate
    cannot change the objective; it is handed whole to the user with the
    smallest bit total (lowest index on ties) so the output is deterministic,
    with mu = 0.
    """
    n = current_bits.shape[0]
    shares = np.zeros(n)
    n_served = 0
    for i in range(n):
        if rates[i] > 0.0:
            n_served += 1
    if n_served == 0:
        shares[np.argmin(current_bits)] = budget
        return shares, 0.0
    if n_served == 1:
        for i in range(n):
            if rates[i] > 0.0:
                shares[i] = budget
                return shares, rates[i] / ((current_bits[i] + budget * rates[i]) * LN2)

    # share_i(mu) = max(0, 1/(mu*ln2) - ratio_i), decreasing in mu
    ratio = np.empty(n)
    lo = np.inf
    hi = 0.0
    for i in range(n):
        if rates[i] > 0.0:
            ratio[i] = current_bits[i] / rates[i]
            m = rates[i] / ((current_bits[i] + budget * rates[i]) * LN2)
            if m < lo:
                lo = m
            if current_bits[i] > 0.0:
                m = rates[i] / (current_bits[i] * LN2)
                if m > hi:
                    hi = m
        else:
            ratio[i] = np.inf
    if hi <= 0.0:
        hi = n_served / (budget * LN2)
    for _ in range(200):
        total = 0.0
        nu = 1.0 / (hi * LN2)
        for i in range(n):
            s = nu - ratio[i]
            if s > 0.0:
                total += s
        if total <= budget:
            break
        hi *= 2.0

    for _ in range(max_bisect):
        if hi - lo <= bracket_tol:
            break
        mid = 0.5 * (lo + hi)
        nu = 1.0 / (mid * LN2)
        total = 0.0
        for i in range(n):
            s = nu - ratio[i]
            if s > 0.0:
                total += s
        if total >= budget:
            lo = mid
        else:
            hi = mid

    # exact water level on the active set found by bisection
    nu = 1.0 / (0.5 * (lo + hi) * LN2)
    active = np.zeros(n, dtype=np.bool_)
    n_active = 0
    for i in range(n):
        if rates[i] > 0.0 and nu - ratio[i] > 0.0:
            active[i] = True
            n_active += 1
    if n_active == 0:
        best = -1
        for i in range(n):
            if rates[i] > 0.0 and (best < 0 or ratio[i] < ratio[best]):
                best = i
        active[best] = True
        n_active = 1
    for _ in range(n):
        ratio_sum = 0.0
        for i in range(n):
            if active[i]:
                ratio_sum += ratio[i]
        nu = (budget + ratio_sum) / n_active
        dropped = False
        for i in range(n):
            if active[i] and nu - ratio[i] < 0.0:
                active[i] = False
                n_active -= 1
                dropped = True
        if not dropped:
            break
    for i in range(n):
        if active[i]:
            shares[i] = nu - ratio[i]
    return shares, 1.0 / (nu * LN2)


def _py_time_sweep(tau, rates, slot_lengths, bits):
    """One pass over all slots, re-splitting each column and committing it.

    tau and bits are updated in place; bits must equal the row sums of
    tau * rates on entry.
    """
    N, K = tau.shape
    for t in range(K):
        for i in range(N):
            bits[i] -= tau[i, t] * rates[i, t]
        col = np.empty(N)
        for i in range(N):
            col[i] = rates[i, t]
        shares, _ = slot_shares(bits, col, slot_lengths[t], 200, 1e-14)
        for i in range(N):
            tau[i, t] = shares[i]
            bits[i] += shares[i] * rates[i, t]


def _py_time_fixed_point(tau, rates, slot_lengths, tol, max_sweeps):
    """Sweep columns until the bit totals stop moving; returns sweeps used."""
    N, K = tau.shape
    bits = np.zeros(N)
    for i in range(N):
        s = 0.0
        for t in range(K):
            s += tau[i, t] * rates[i, t]
        bits[i] = s
    sweeps = 0
    for _ in range(max_sweeps):
        prev = bits.copy()
        time_sweep(tau, rates, slot_lengths, bits)
        sweeps += 1
        dmax = 0.0
        scale = 1.0
        for i in range(N):
            d = abs(bits[i] - prev[i])
            if d > dmax:
                dmax = d
            if abs(bits[i]) > scale:
                scale = abs(bits[i])
        if dmax <= tol * scale:
            break
    return sweeps


def _py_grid_eval(p, slot_lengths, norm_gains, bandwidth, fp_tol, max_sweeps, rates, tau):
    """Utility of the best time allocation found for a fixed power vector."""
    N = norm_gains.shape[0]
    K = slot_lengths.shape[0]
    for i in range(N):
        for t in range(K):
            rates[i, t] = bandwidth * np.log2(1.0 + norm_gains[i] * p[t])
            tau[i, t] = slot_lengths[t] / N
    time_fixed_point(tau, rates, slot_lengths, fp_tol, max_sweeps)
    u = 0.0
    for i in range(N):
        b = 0.0
        for t in range(K):
            b += tau[i, t] * rates[i, t]
        if b <= 0.0:
            return -np.inf
        u += np.log2(b)
    return u


def _py_grid_search(slot_lengths, cum_energy, norm_gains, bandwidth, step,
                    fp_tol, max_sweeps):
    """Exhaustive search over the energy-feasible power grid, K <= 3.

    Each coordinate ranges over multiples of ``step`` up to the cumulative
    energy bound given the earlier coordinates, with the bound itself always
    included so boundary optima are hit exactly.  Returns
    (best_utility, best_powers, best_time_alloc).
    """
    K = slot_lengths.shape[0]
    N = norm_gains.shape[0]
    best_u = -np.inf
    best_p = np.zeros(K)
    best_tau = np.zeros((N, K))
    p = np.zeros(K)
    rates = np.zeros((N, K))
    tau = np.zeros((N, K))

    ub0 = cum_energy[0] / slot_lengths[0]
    n0 = int(ub0 / step)
    for i0 in range(n0 + 2):
        v0 = ub0 if i0 == n0 + 1 else i0 * step
        if v0 > ub0:
            v0 = ub0
        p[0] = v0
        if K == 1:
            u = grid_eval(p, slot_lengths, norm_gains, bandwidth, fp_tol,
                          max_sweeps, rates, tau)
            if u > best_u:
                best_u = u
                best_p[0] = p[0]
                best_tau[:, :] = tau
            continue
        spent0 = v0 * slot_lengths[0]
        ub1 = (cum_energy[1] - spent0) / slot_lengths[1]
        if ub1 < 0.0:
            ub1 = 0.0
        n1 = int(ub1 / step)
        for i1 in range(n1 + 2):
            v1 = ub1 if i1 == n1 + 1 else i1 * step
            if v1 > ub1:
                v1 = ub1
            p[1] = v1
            if K == 2:
                u = grid_eval(p, slot_lengths, norm_gains, bandwidth, fp_tol,
                              max_sweeps, rates, tau)
                if u > best_u:
                    best_u = u
                    best_p[0] = p[0]
                    best_p[1] = p[1]
                    best_tau[:, :] = tau
                continue
            spent1 = spent0 + v1 * slot_lengths[1]
            ub2 = (cum_energy[2] - spent1) / slot_lengths[2]
            if ub2 < 0.0:
                ub2 = 0.0
            n2 = int(ub2 / step)
            for i2 in range(n2 + 2):
                v2 = ub2 if i2 == n2 + 1 else i2 * step
                if v2 > ub2:
                    v2 = ub2
                p[2] = v2
                u = grid_eval(p, slot_lengths, norm_gains, bandwidth, fp_tol,
                              max_sweeps, rates, tau)
                if u > best_u:
                    best_u = u
                    best_p[0] = p[0]
                    best_p[1] = p[1]
                    best_p[2] = p[2]
                    best_tau[:, :] = tau
    return best_u, best_p, best_tau


USING_NUMBA = False
if not numba_disabled_by_env():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        njit = None
    if njit is not None:
        slot_shares = njit(cache=True)(_py_slot_shares)
        time_sweep = njit(cache=True)(_py_time_sweep)
        time_fixed_point = njit(cache=True)(_py_time_fixed_point)
        grid_eval = njit(cache=True)(_py_grid_eval)
        grid_search = njit(cache=True)(_py_grid_search)
        USING_NUMBA = True
if not USING_NUMBA:
    slot_shares = _py_slot_shares
    time_sweep = _py_time_sweep
    time_fixed_point = _py_time_fixed_point
    grid_eval = _py_grid_eval
    grid_search = _py_grid_search
