"""Monte-Carlo frame engine.

Draws one channel per frame, runs a policy slot by slot with the selected
error model (perfect feedback, injected flip probabilities, or signal-level
detection on the beacon statistic), accounts energy and delivered bits, and
aggregates power/throughput statistics with normal-approximation confidence
intervals.  Trials are independent and reproducible: trial i derives its
generator from (seed, i), so results do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .phy import SystemParams, ChannelDraw, draw_channel
from .angles import PiecewisePrior
from .planner import Schedule, error_analysis

ERROR_MODES = ("none", "injected", "signal")


@dataclass(frozen=True)
class BeaconObservation:
    truth: bool       # some cluster inside the probed 2D beam
    detected: bool    # threshold decision after the error model
    power: float      # decision statistic (noise-free outside signal mode)


class ErrorModel:
    """Turns beacon truths into detector outcomes for one frame."""

    def __init__(self, mode: str, rng, tau_th: float,
                 p_fa: float = 0.0, p_md: float = 0.0, p_cmp: float | None = None):
        if mode not in ERROR_MODES:
            raise ValueError(f"unknown error mode {mode!r}")
        self.mode = mode
        self.rng = rng
        self.tau_th = tau_th
        self.p_fa = p_fa
        self.p_md = p_md
        self.p_cmp = max(p_fa, p_md) if p_cmp is None else p_cmp

    def observe_beacon(self, truth: bool, amp: complex, kappa: float) -> BeaconObservation:
        clean = kappa * abs(amp) ** 2
        if self.mode == "signal":
            scale = math.sqrt(0.5)
            noise = complex(self.rng.normal(0.0, scale), self.rng.normal(0.0, scale))
            z = math.sqrt(kappa) * amp + noise
            power = abs(z) ** 2
            return BeaconObservation(truth=truth, detected=power > self.tau_th,
                                     power=power)
        if self.mode == "injected":
            if truth:
                detected = self.rng.random() >= self.p_md
            else:
                detected = self.rng.random() < self.p_fa
            return BeaconObservation(truth=truth, detected=detected, power=clean)
        return BeaconObservation(truth=truth, detected=truth, power=clean)

    def compare(self, obs_a: BeaconObservation, obs_b: BeaconObservation) -> bool:
        """True when the first beacon wins the two-way power comparison."""
        if self.mode == "injected":
            correct = obs_a.power >= obs_b.power
            if self.rng.random() < self.p_cmp:
                return not correct
            return correct
        return obs_a.power >= obs_b.power

    def select_strongest(self, obs_list) -> int:
        """Index of the winning beacon of a sweep (max received power)."""
        if self.mode != "injected":
            return max(range(len(obs_list)), key=lambda i: obs_list[i].power)
        hits_true = [i for i, o in enumerate(obs_list) if o.truth and o.detected]
        if hits_true:
            return max(hits_true, key=lambda i: obs_list[i].power)
        false_alarms = [i for i, o in enumerate(obs_list) if o.detected]
        if false_alarms:
            return int(self.rng.choice(false_alarms))
        return len(obs_list) - 1


@dataclass(frozen=True)
class FrameOutcome:
    energy_align: float
    energy_data: float
    bits_delivered: float
    aligned: bool          # dominant cluster inside the final data beam
    error_event: bool      # dominant cluster left the tracked support
    l_used: int            # alignment slots consumed

    @property
    def energy_total(self) -> float:
        return self.energy_align + self.energy_data


def run_frame(policy, params: SystemParams, channel: ChannelDraw,
              errmodel: ErrorModel, detection) -> FrameOutcome:
    """Run one frame of the given policy against one channel draw."""
    policy.begin_frame(errmodel)
    energy_align = 0.0
    error_event = False
    theta_t0 = channel.theta_t[0]
    theta_r0 = channel.theta_r[0]

    while True:
        action = policy.next_action()
        if hasattr(action, "rate"):  # DataPhase
            data = action
            break
        probe = action
        assert abs(probe.energy - detection.phi_s * probe.beam_measure) \
            <= 1e-9 * max(probe.energy, 1e-300), "beacon off the energy floor"
        truth = any(
            probe.beam_t.contains(tt) and probe.beam_r.contains(tr)
            for tt, tr in zip(channel.theta_t, channel.theta_r)
        )
        amp = channel.amp_in_beam(probe.beam_t, probe.beam_r)
        kappa = detection.beacon_snr_product(probe.energy, probe.beam_measure)
        obs = errmodel.observe_beacon(truth, amp, kappa)
        policy.observe(obs)
        energy_align += probe.energy
        u_t, u_r = policy.supports()
        if not (u_t.contains(theta_t0) and u_r.contains(theta_r0)):
            error_event = True

    l_used = policy.slots_used
    backlog = params.backlog_bits

    if data.rate <= 0.0 or backlog <= 0.0:
        return FrameOutcome(energy_align, 0.0, 0.0, True, error_event, l_used)

    if not math.isfinite(data.energy_per_slot):
        # rate not representable; the transmitter declines the data phase
        return FrameOutcome(energy_align, 0.0, 0.0, False, error_event, l_used)

    energy_data = data.energy_per_slot * data.n_slots
    beam_measure = data.beam_t.measure() * data.beam_r.measure()
    power = data.energy_per_slot / params.slot_time
    nu = (2.0 * math.pi) ** 2 * power / (params.n0 * params.w_tot * beam_measure)
    gamma_eff = channel.gain_in_beam(data.beam_t, data.beam_r)
    achievable = params.w_tot * math.log1p(nu * gamma_eff) / math.log(2.0)
    success = achievable >= data.rate * (1.0 - 1e-12)
    bits = backlog if success else 0.0
    aligned = data.beam_t.contains(theta_t0) and data.beam_r.contains(theta_r0)
    return FrameOutcome(energy_align, energy_data, bits, aligned, error_event, l_used)


@dataclass(frozen=True)
class MonteCarloStats:
    trials: int
    mean_power: float
    power_ci95: float
    mean_spectral_efficiency: float
    se_ci95: float
    alignment_success_rate: float
    outage_rate: float

    @property
    def mean_throughput(self) -> float:
        return self.mean_spectral_efficiency  # bits/s/Hz; multiply by W for bits/s


def trial_rng(seed: int, trial: int):
    """Counter-split generator: reproducible from (seed, trial index)."""
    return np.random.default_rng([seed, trial])


def run_monte_carlo(policy, params: SystemParams, detection, trials: int, seed: int,
                    error_mode: str = "none", p_fa: float = 0.0, p_md: float = 0.0,
                    p_cmp: float | None = None,
                    prior_t: PiecewisePrior | None = None,
                    prior_r: PiecewisePrior | None = None,
                    collect: bool = False):
    """Aggregate independent frames; deterministic given (seed, trials).

    Returns MonteCarloStats, or (stats, records) with collect=True where each
    record is (trial, energy_J, bits, aligned, error_event, l_used).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if prior_t is None:
        prior_t = PiecewisePrior.uniform(params.u_t0)
    if prior_r is None:
        prior_r = PiecewisePrior.uniform(params.u_r0)

    energies = np.empty(trials)
    bits = np.empty(trials)
    aligned = np.empty(trials, dtype=bool)
    errors = np.empty(trials, dtype=bool)
    records = [] if collect else None

    for i in range(trials):
        rng = trial_rng(seed, i)
        channel = draw_channel(params, prior_t, prior_r, rng)
        errmodel = ErrorModel(error_mode, rng, detection.tau_th,
                              p_fa=p_fa, p_md=p_md, p_cmp=p_cmp)
        out = run_frame(policy, params, channel, errmodel, detection)
        energies[i] = out.energy_total
        bits[i] = out.bits_delivered
        aligned[i] = out.aligned
        errors[i] = out.error_event
        if collect:
            records.append((i, out.energy_total, out.bits_delivered,
                            out.aligned, out.error_event, out.l_used))

    powers = energies / params.t_frame
    ses = bits / (params.t_frame * params.w_tot)
    stats = MonteCarloStats(
        trials=trials,
        mean_power=float(powers.mean()),
        power_ci95=float(1.96 * powers.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
        mean_spectral_efficiency=float(ses.mean()),
        se_ci95=float(1.96 * ses.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
        alignment_success_rate=float(aligned.mean()),
        outage_rate=float((bits == 0.0).mean()),
    )
    if collect:
        return stats, records
    return stats


@dataclass(frozen=True)
class AnalyticComparison:
    analytic_power: float
    empirical_power: float
    power_z: float
    analytic_throughput: float      # bits/s
    empirical_throughput: float
    throughput_z: float

    @property
    def flagged(self) -> bool:
        return abs(self.power_z) > 3.0 or abs(self.throughput_z) > 3.0


def analytic_vs_empirical(policy, params: SystemParams, detection,
                          schedule: Schedule, p_fa: float, p_md: float,
                          trials: int, seed: int) -> AnalyticComparison:
    """Closed-form error propagation vs injected-error Monte-Carlo."""
    ana = error_analysis(schedule, p_fa, p_md)
    stats = run_monte_carlo(policy, params, detection, trials, seed,
                            error_mode="injected", p_fa=p_fa, p_md=p_md)

    def zscore(emp, ana_val, ci95):
        se = ci95 / 1.96
        if se == 0.0:
            return 0.0 if abs(emp - ana_val) < 1e-12 * max(abs(ana_val), 1.0) else math.inf
        return (emp - ana_val) / se

    emp_thr = stats.mean_spectral_efficiency * params.w_tot
    return AnalyticComparison(
        analytic_power=ana.p_bar_err,
        empirical_power=stats.mean_power,
        power_z=zscore(stats.mean_power, ana.p_bar_err, stats.power_ci95),
        analytic_throughput=ana.t_bar_err,
        empirical_throughput=emp_thr,
        throughput_z=zscore(emp_thr, ana.t_bar_err, stats.se_ci95 * params.w_tot),
    )


def calibrate_detection(detection, trials: int, seed: int):
    """Empirical false-alarm and misdetection rates of floor-energy beacons.

    Vectorized: absent-beacon statistics are unit-variance complex noise;
    present-beacon statistics draw the channel from its posterior given the
    design estimate.  Returns (pfa_hat, pmd_hat).
    """
    rng = np.random.default_rng([seed, 0xBEAC])
    tau = detection.tau_th
    n = trials

    noise = rng.normal(size=(n, 2))
    p0 = 0.5 * (noise ** 2).sum(axis=1)
    pfa_hat = float((p0 > tau).mean())

    kappa = detection.kappa_star
    h_mean = math.sqrt(detection.gamma_hat)
    h = (h_mean
         + rng.normal(scale=math.sqrt(detection.sigma_e2 / 2.0), size=n)
         + 1j * rng.normal(scale=math.sqrt(detection.sigma_e2 / 2.0), size=n))
    z = math.sqrt(kappa) * h + (rng.normal(scale=math.sqrt(0.5), size=n)
                                + 1j * rng.normal(scale=math.sqrt(0.5), size=n))
    p1 = np.abs(z) ** 2
    pmd_hat = float((p1 <= tau).mean())
    return pfa_hat, pmd_hat
