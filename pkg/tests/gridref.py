"""Brute-force dynamic programs used as oracles for the schedule optimizer.

Small-instance reference DPs over a discretized action space:

* free_dp      - every slot may align (probe fraction on a grid, including a
                 zero-width no-op) or communicate (rate on an eighths grid),
                 in any order;
* two_phase_dp - same grids, but communication is irreversible: once a slot
                 communicates, no later slot may align.

State is (slot, eighths of backlog left, phase); values are energy densities
per unit of uncertainty measure, so they compare directly with the planner's
v sequence.
"""

import math
from functools import lru_cache

RHO_GRID = [i * 0.05 for i in range(20)]       # 0.00 .. 0.95
RATE_STEPS = 8                                 # backlog splits into eighths


def free_dp(prob):
    """Interleaving-allowed optimum on the grid."""
    n = prob.n_slots

    @lru_cache(maxsize=None)
    def w(k, d):
        if k == n:
            return 0.0 if d == 0 else math.inf
        best = math.inf
        for rho in RHO_GRID:
            nxt = w(k + 1, d)
            if math.isfinite(nxt):
                best = min(best, prob.phi_s * rho
                           + (rho * rho + (1 - rho) ** 2) * nxt)
        for m in range(1, d + 1):
            rate = (m / RATE_STEPS) * n * prob.r_min
            nxt = w(k + 1, d - m)
            if math.isfinite(nxt):
                best = min(best, prob.phi_d(rate) + nxt)
        return best

    return w(0, RATE_STEPS)


def two_phase_dp(prob):
    """Alignment-then-data optimum on the same grid."""
    n = prob.n_slots

    @lru_cache(maxsize=None)
    def w(k, d, data_started):
        if k == n:
            return 0.0 if d == 0 else math.inf
        best = math.inf
        if not data_started:
            for rho in RHO_GRID:
                nxt = w(k + 1, d, False)
                if math.isfinite(nxt):
                    best = min(best, prob.phi_s * rho
                               + (rho * rho + (1 - rho) ** 2) * nxt)
        elif d == 0:
            best = min(best, w(k + 1, 0, True))  # idle after the backlog drains
        for m in range(1, d + 1):
            rate = (m / RATE_STEPS) * n * prob.r_min
            nxt = w(k + 1, d - m, True)
            if math.isfinite(nxt):
                best = min(best, prob.phi_d(rate) + nxt)
        return best

    return w(0, RATE_STEPS, False)


def rounded_schedule_value(prob, schedule):
    """Grid-feasible upper bound built from the continuous schedule.

    Probe fractions round to the grid; the backlog spreads over the final
    min(N - L, 8) slots in near-equal eighths.  The gap between this value
    and the continuous optimum bounds the grid quantization error.
    """
    n = prob.n_slots
    l_star = schedule.l_star
    n_data = min(n - l_star, RATE_STEPS)
    # balanced integer composition of the eighths across the data slots
    base, extra = divmod(RATE_STEPS, n_data)
    parts = [base + (1 if i < extra else 0) for i in range(n_data)]

    value = 0.0
    for m in parts:
        rate = (m / RATE_STEPS) * n * prob.r_min
        value += prob.phi_d(rate)
    # idle slots between alignment and data cost nothing (zero-width probes)
    for k in range(l_star - 1, -1, -1):
        rho = min(RHO_GRID, key=lambda g: abs(g - schedule.rho[k]))
        value = prob.phi_s * rho + (rho * rho + (1 - rho) ** 2) * value
    return value
