"""Physical-layer primitives under the sectored antenna abstraction.

Carries the system parameter set, free-space path loss, sectored beam gains,
fading draws with optional channel estimation, and the instantaneous SNR of a
beamformed link.  Antenna counts are recorded for documentation only; the
sectored gain model replaces array responses throughout.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .angles import AngleSet

TWO_PI = 2.0 * math.pi

# -173 dBm/Hz one-sided noise density
DEFAULT_N0_W_PER_HZ = 10.0 ** ((-173.0 - 30.0) / 10.0)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt: float) -> float:
    if watt <= 0.0:
        return -math.inf
    return 10.0 * math.log10(watt) + 30.0


@dataclass(frozen=True)
class SystemParams:
    """All physical constants of a run, in SI units."""

    wavelength: float = 0.01            # m (30 GHz nominal)
    distance: float = 10.0              # m
    path_loss_exp: float = 2.0
    n0: float = DEFAULT_N0_W_PER_HZ     # W/Hz
    w_tot: float = 500e6                # Hz
    t_frame: float = 20e-3              # s
    n_slots: int = 160
    t_beacon: float = 50e-6             # s
    t_feedback: float = 50e-6           # s
    eps_outage: float = 0.01
    r_min: float = 7.5e9                # bits/s
    p_e: float = 1e-5
    gamma_hat: float = 0.0              # linear; 0 selects Rayleigh/no-CSI mode
    sigma_e2: float | None = None       # linear; None -> 1/path_loss (no CSI)
    phi_s_override: float | None = None # J/rad^2; calibration knob
    t_symbol: float = 2e-9              # s; beacon symbol duration
    s_energy: float = 1.0               # ||s||^2 of the beacon sequence
    l_max: int = 14
    u_t0: AngleSet = field(default_factory=lambda: AngleSet.interval(-math.pi / 2, math.pi / 2))
    u_r0: AngleSet = field(default_factory=lambda: AngleSet.interval(-math.pi / 2, math.pi / 2))
    cluster_count: int = 1
    weak_fraction: float = 0.0          # share of channel energy in the weak cluster
    m_tx_antennas: int = 128            # informational only
    m_rx_antennas: int = 128            # informational only

    def __post_init__(self):
        if min(self.wavelength, self.distance, self.w_tot, self.t_frame,
               self.t_beacon, self.t_feedback, self.n0) <= 0.0:
            raise ValueError("durations, bandwidths and noise density must be positive")
        if not 0.0 < self.eps_outage < 1.0:
            raise ValueError("outage target must lie in (0, 1)")
        if not 0.0 < self.p_e < 0.5:
            raise ValueError("detection error target must lie in (0, 0.5)")
        if self.n_slots < 1:
            raise ValueError("need at least one slot per frame")
        if self.slot_time < self.t_beacon + self.t_feedback - 1e-15:
            raise ValueError(
                "slot too short: a beacon plus its feedback must fit "
                f"(T={self.slot_time:.3g}s < {self.t_beacon + self.t_feedback:.3g}s)"
            )
        if self.r_min < 0.0:
            raise ValueError("rate requirement cannot be negative")
        if self.l_max < 0 or self.l_max > self.n_slots - 1:
            raise ValueError("alignment-length cap must lie in [0, n_slots-1]")
        if self.cluster_count not in (1, 2):
            raise ValueError("cluster_count must be 1 or 2")
        if not 0.0 <= self.weak_fraction < 0.5:
            raise ValueError("weak-cluster fraction must lie in [0, 0.5)")
        if self.u_t0.is_empty() or self.u_r0.is_empty():
            raise ValueError("initial uncertainty regions must be non-empty")
        if self.sigma_e2 is not None and self.sigma_e2 < 0.0:
            raise ValueError("estimation variance cannot be negative")
        if self.gamma_hat < 0.0:
            raise ValueError("gain estimate cannot be negative")

    # -- derived quantities ---------------------------------------------------

    @property
    def slot_time(self) -> float:
        return self.t_frame / self.n_slots

    @property
    def u0_measure(self) -> float:
        return self.u_t0.measure() * self.u_r0.measure()

    @property
    def backlog_bits(self) -> float:
        return self.r_min * self.t_frame

    def path_loss(self) -> float:
        """Free-space attenuation (4*pi*d/lambda)^alpha, linear >= 1 beyond d0."""
        return (4.0 * math.pi * self.distance / self.wavelength) ** self.path_loss_exp

    def effective_sigma_e2(self) -> float:
        """Estimation-noise variance; defaults to the full channel variance
        (no CSI), which reduces the posterior of the gain to Rayleigh."""
        if self.sigma_e2 is None:
            return 1.0 / self.path_loss()
        return self.sigma_e2


def sectored_gain(beam: AngleSet, theta: float) -> float:
    """Idealized antenna gain: 2*pi/|beam| inside the beam, zero outside."""
    m = beam.measure()
    if m <= 0.0:
        raise ValueError("sectored gain undefined for an empty beam")
    return TWO_PI / m if beam.contains(theta) else 0.0


def snr(power: float, beam_t: AngleSet, beam_r: AngleSet,
        theta_t: float, theta_r: float, gamma: float, params: SystemParams) -> float:
    """Instantaneous SNR of a beamformed link; exactly zero on misalignment."""
    if power < 0.0:
        raise ValueError("power cannot be negative")
    g_t = sectored_gain(beam_t, theta_t)
    g_r = sectored_gain(beam_r, theta_r)
    return power * gamma * g_t * g_r / (params.n0 * params.w_tot)


def bf_snr_factor(power: float, beam_t: AngleSet, beam_r: AngleSet,
                  params: SystemParams) -> float:
    """Beamforming SNR factor: (2*pi)^2 P / (N0 W |B_t||B_r|)."""
    b = beam_t.measure() * beam_r.measure()
    if b <= 0.0:
        raise ValueError("beam measure must be positive")
    return TWO_PI ** 2 * power / (params.n0 * params.w_tot * b)


@dataclass(frozen=True)
class ChannelDraw:
    """One frame's channel realization.

    Per cluster: departure/arrival angles and the complex small-scale gain
    (absolute scale, variance = energy_fraction / path_loss).  `gamma_hat` is
    the gain estimate available to both ends before the frame starts.
    """

    theta_t: tuple      # AoD per cluster, strongest first
    theta_r: tuple      # AoA per cluster
    h: tuple            # complex gain per cluster
    gamma_hat: float    # |h_est|^2 of the composite channel

    def gain_in_beam(self, beam_t: AngleSet, beam_r: AngleSet) -> float:
        """|sum of in-beam cluster gains|^2; clusters add coherently."""
        acc = 0j
        for tt, tr, hh in zip(self.theta_t, self.theta_r, self.h):
            if beam_t.contains(tt) and beam_r.contains(tr):
                acc += hh
        return abs(acc) ** 2

    def amp_in_beam(self, beam_t: AngleSet, beam_r: AngleSet) -> complex:
        acc = 0j
        for tt, tr, hh in zip(self.theta_t, self.theta_r, self.h):
            if beam_t.contains(tt) and beam_r.contains(tr):
                acc += hh
        return acc

    @property
    def gamma(self) -> float:
        """Total channel gain |sum h_l|^2 (full-circle beams)."""
        return abs(sum(self.h)) ** 2


def _cn_sample(rng, variance: float) -> complex:
    if variance <= 0.0:
        return 0j
    s = math.sqrt(variance / 2.0)
    return complex(rng.normal(0.0, s), rng.normal(0.0, s))


def draw_channel(params: SystemParams, prior_t, prior_r, rng) -> ChannelDraw:
    """Draw one frame's AoD/AoA pairs and fading gains.

    Angles follow the given priors, independently per cluster.  The composite
    gain has variance 1/path_loss split (1-rho, rho) across clusters.  With
    sigma_e2 < 1/path_loss an estimate h_est is drawn first and the true gain
    follows h | h_est ~ CN(h_est, sigma_e2); the default no-CSI mode has
    h_est = 0 and sigma_e2 = 1/path_loss (pure Rayleigh posterior).
    """
    loss = params.path_loss()
    var_total = 1.0 / loss
    sigma_e2 = params.effective_sigma_e2()
    if sigma_e2 > var_total + 1e-30:
        raise ValueError("estimation variance exceeds the channel variance")

    if params.cluster_count == 2:
        fracs = (1.0 - params.weak_fraction, params.weak_fraction)
    else:
        fracs = (1.0,)

    thetas_t, thetas_r, gains = [], [], []
    est_total = 0j
    for frac in fracs:
        thetas_t.append(prior_t.sample(rng))
        thetas_r.append(prior_r.sample(rng))
        var_c = frac * var_total
        # split the estimated/unestimated variance proportionally per cluster
        var_est = frac * (var_total - sigma_e2)
        h_est = _cn_sample(rng, var_est)
        h = h_est + _cn_sample(rng, var_c - var_est)
        gains.append(h)
        est_total += h_est

    if params.sigma_e2 is None:
        gamma_hat = 0.0  # no CSI
    elif sigma_e2 == 0.0:
        gamma_hat = abs(sum(gains)) ** 2
    else:
        gamma_hat = abs(est_total) ** 2

    return ChannelDraw(
        theta_t=tuple(thetas_t),
        theta_r=tuple(thetas_r),
        h=tuple(gains),
        gamma_hat=gamma_hat,
    )
