"""Optimal alignment/communication schedule for one frame.

The frame splits into a fixed-length alignment phase (beacons narrowing the
uncertainty region by a fraction rho_k per slot) followed by constant-rate
data transmission.  A backward value recursion over per-rad^2 energy densities
yields the optimal phase length, the fraction sequence, and the analytic
average power; a companion recursion propagates the effect of false-alarm and
misdetection errors on throughput and power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .detection import DetectionDesign, design_detection
from .outage import OutageDesign, design_outage


@dataclass(frozen=True)
class PlannerProblem:
    """Inputs of the schedule optimization, all in SI units."""

    n_slots: int
    r_min: float            # bits/s averaged over the frame
    eps: float
    phi_s: float            # beacon energy floor, J/rad^2
    l_max: int
    slot_time: float
    frame_time: float
    u0_measure: float       # |U_t0| * |U_r0|, rad^2
    w_tot: float
    outage: OutageDesign
    detection: DetectionDesign | None = None

    def phi_d(self, rate: float) -> float:
        return self.outage.phi_d(rate)

    @property
    def theta(self) -> float:
        return self.outage.theta


def build_problem(params, detection: DetectionDesign | None = None,
                  outage: OutageDesign | None = None) -> PlannerProblem:
    det = detection if detection is not None else design_detection(params)
    out = outage if outage is not None else design_outage(params)
    return PlannerProblem(
        n_slots=params.n_slots,
        r_min=params.r_min,
        eps=params.eps_outage,
        phi_s=det.phi_s,
        l_max=params.l_max,
        slot_time=params.slot_time,
        frame_time=params.t_frame,
        u0_measure=params.u0_measure,
        w_tot=params.w_tot,
        outage=out,
        detection=det,
    )


class InfeasibleSchedule(ValueError):
    pass


def data_phase_value(prob: PlannerProblem, length: int) -> float:
    """Energy density of serving the whole backlog in the last N-L slots:
    (N-L) phi_d(N R_min / (N-L))."""
    n = prob.n_slots
    if not 0 <= length < n:
        raise ValueError(f"alignment length must lie in [0, {n - 1}]")
    rate = n * prob.r_min / (n - length)
    return (n - length) * prob.phi_d(rate)


def min_alignment_length(prob: PlannerProblem) -> int | None:
    """Smallest L with data-phase value above phi_s/2, or None if no slot
    count qualifies.  Shorter alignment phases than this clamp every probe
    fraction to zero and are dominated."""
    half = 0.5 * prob.phi_s
    for length in range(prob.n_slots):
        if data_phase_value(prob, length) > half:
            return length
    return None


def value_recursion(prob: PlannerProblem, length: int) -> list:
    """Backward energy-density recursion for a fixed alignment length.

    v[length] seeds at the data-phase value; each alignment slot applies
    v_k = v' - ((2 v' - phi_s)^+)^2 / (8 v'), the envelope of the probe-size
    optimization with the fraction clamped to [0, 1/2)."""
    phi_s = prob.phi_s
    v = [0.0] * (length + 1)
    v[length] = data_phase_value(prob, length)
    for k in range(length - 1, -1, -1):
        v[k] = _value_step(phi_s, v[k + 1])
    return v


def _value_step(phi_s: float, v_next: float) -> float:
    """One alignment step of the value recursion.

    Algebraically v' - ((2v' - phi_s)^+)^2 / (8v'); expanded to
    v'/2 + phi_s/2 - phi_s^2/(8v') on the unclamped branch so the probe-cost
    term survives even when phi_s is many orders below v'.
    """
    if v_next <= 0.0 or not math.isfinite(v_next):
        return v_next
    if 2.0 * v_next <= phi_s:
        return v_next
    return 0.5 * v_next + 0.5 * phi_s - phi_s * phi_s / (8.0 * v_next)


def fraction_gap_from_value(phi_s: float, v_next: float) -> float:
    """Distance of the optimal probe fraction below one half: phi_s/(4 v'),
    clamped to 1/2 (i.e. fraction 0) when a probe cannot pay for itself."""
    if v_next <= 0.0:
        return 0.5
    return min(phi_s / (4.0 * v_next), 0.5)


def fraction_gap_schedule(prob: PlannerProblem, length: int) -> list:
    """Gap sequence delta_k = 1/2 - rho_k via the fraction recursion.

    The closed-form recursion rho_k = (1 - rho_{k+1}) rho_{k+1} /
    (1 - 2 rho_{k+1}^2) rewritten in terms of the gap,
    delta_k = 2 delta' / (1 + 4 delta' - 4 delta'^2), is exact and keeps
    resolution when the fractions crowd against 1/2.
    """
    if length == 0:
        return []
    seed = data_phase_value(prob, length)
    if not math.isfinite(seed):
        raise InfeasibleSchedule("data-phase energy density is not finite")
    if seed <= 0.5 * prob.phi_s:
        # degenerate: every probe clamps to zero width
        return [0.5] * length
    gap = [0.0] * length
    gap[length - 1] = prob.phi_s / (4.0 * seed)
    for k in range(length - 2, -1, -1):
        d = gap[k + 1]
        gap[k] = 2.0 * d / (1.0 + 4.0 * d - 4.0 * d * d)
    return gap


def fraction_schedule(prob: PlannerProblem, length: int) -> list:
    """Fraction sequence rho_0..rho_{L-1} (see fraction_gap_schedule)."""
    return [0.5 - d for d in fraction_gap_schedule(prob, length)]


@dataclass(frozen=True)
class Schedule:
    """Planner output: phase split, probe fractions and analytic power."""

    l_star: int
    rho: tuple               # probe fractions, length l_star
    rho_gap: tuple           # 1/2 - rho_k, kept separately for resolution
    theta: float             # data-beam fraction of the final region
    data_rate: float         # bits/s during the data phase
    v: tuple                 # energy densities v_0..v_{l_star}, J/rad^2
    p_bar_u: float           # analytic average power, W
    l_min: int | None
    # inputs snapshot
    n_slots: int
    r_min: float
    eps: float
    phi_s: float
    slot_time: float
    frame_time: float
    u0_measure: float
    w_tot: float

    @property
    def v0(self) -> float:
        return self.v[0]

    @property
    def backlog_bits(self) -> float:
        return self.r_min * self.frame_time


def optimize_schedule(prob: PlannerProblem) -> Schedule:
    """Pick the alignment length minimizing v_0 over {0} u {L_min..L_cap}.

    Ties break toward fewer alignment slots.  Raises InfeasibleSchedule when
    no candidate has finite value (rate constraint not representable).
    """
    n = prob.n_slots
    cap = min(prob.l_max, n - 1)
    l_min = min_alignment_length(prob)
    candidates = [0]
    if l_min is not None:
        candidates += [l for l in range(max(l_min, 1), cap + 1)]

    best_l, best_v = None, math.inf
    for length in candidates:
        v0 = value_recursion(prob, length)[0]
        if best_l is None or v0 < best_v:
            best_l, best_v = length, v0
    if best_l is None or not math.isfinite(best_v):
        raise InfeasibleSchedule(
            "no alignment length yields a finite energy density; the rate "
            "requirement is not representable in this frame"
        )

    v = value_recursion(prob, best_l)
    gaps = fraction_gap_schedule(prob, best_l)
    rate = n * prob.r_min / (n - best_l)
    return Schedule(
        l_star=best_l,
        rho=tuple(0.5 - d for d in gaps),
        rho_gap=tuple(gaps),
        theta=prob.theta,
        data_rate=rate,
        v=tuple(v),
        p_bar_u=v[0] * prob.u0_measure / prob.frame_time,
        l_min=l_min,
        n_slots=n,
        r_min=prob.r_min,
        eps=prob.eps,
        phi_s=prob.phi_s,
        slot_time=prob.slot_time,
        frame_time=prob.frame_time,
        u0_measure=prob.u0_measure,
        w_tot=prob.w_tot,
    )


def switch_rule_value(prob: PlannerProblem) -> tuple:
    """Reference recursion that decides per slot between data communication
    and one more alignment step, uncapped.  Returns (v_0, switch slot).

    Kept as a cross-check: it must coincide with the fixed-length optimizer
    when the length cap is inactive.
    """
    n = prob.n_slots
    phi_s = prob.phi_s
    v_next = math.inf
    switch = n
    values = [0.0] * (n + 1)
    values[n] = math.inf
    for k in range(n - 1, -1, -1):
        gamma_k = data_phase_value(prob, k)
        if math.isinf(v_next):
            lambda_k = math.inf
        else:
            excess = max(2.0 * v_next - phi_s, 0.0)
            lambda_k = v_next - excess * excess / (8.0 * v_next) if v_next > 0 else v_next
        if gamma_k < lambda_k:
            switch = k
            v_next = gamma_k
        else:
            v_next = lambda_k
        values[k] = v_next
    return values[0], switch


@dataclass(frozen=True)
class ErrorAnalysis:
    """Closed-form impact of detection errors on the fixed schedule."""

    p_fa: float
    p_md: float
    h: tuple                 # energy bias terms, J/rad^2, h[l_star] = 0
    u: tuple                 # error-free-state correction terms, u[l_star] = 0
    t_bar_err: float         # average delivered rate, bits/s
    p_bar_err: float         # average power with errors, W
    detect_product: float    # per-frame probability of an error-free phase


def error_analysis(schedule: Schedule, p_fa: float, p_md: float) -> ErrorAnalysis:
    """Propagate per-slot false-alarm/misdetection probabilities through the
    alignment phase of a fixed schedule."""
    if not (0.0 <= p_fa < 1.0 and 0.0 <= p_md < 1.0):
        raise ValueError("error probabilities must lie in [0, 1)")
    L = schedule.l_star
    phi_s = schedule.phi_s
    rho = schedule.rho

    h = [0.0] * (L + 1)
    u = [0.0] * (L + 1)
    for k in range(L - 1, -1, -1):
        r = rho[k]
        stay = r * p_fa + (1.0 - r) * (1.0 - p_fa)
        h[k] = phi_s * (r - p_fa) / 2.0 + stay * h[k + 1]
        shrink = r * r * (1.0 - p_md) + (1.0 - r) ** 2 * (1.0 - p_fa)
        u[k] = (shrink * u[k + 1]
                - (1.0 - p_fa - p_md) * r * (phi_s / 2.0 + h[k + 1] * (1.0 - 2.0 * r)))

    product = 1.0
    for r in rho:
        product *= (1.0 - r) * (1.0 - p_fa) + r * (1.0 - p_md)

    t_bar = (1.0 - schedule.eps) * schedule.r_min * product
    p_bar = schedule.p_bar_u + (h[0] + u[0]) * schedule.u0_measure / schedule.frame_time
    return ErrorAnalysis(
        p_fa=p_fa,
        p_md=p_md,
        h=tuple(h),
        u=tuple(u),
        t_bar_err=t_bar,
        p_bar_err=p_bar,
        detect_product=product,
    )


def plan(params, detection: DetectionDesign | None = None,
         outage: OutageDesign | None = None) -> Schedule:
    """Convenience wrapper: design detection + outage, then optimize."""
    return optimize_schedule(build_problem(params, detection, outage))
