"""Beacon detection design.

A Neyman-Pearson threshold test on the matched-filter output decides beacon
presence.  Given a target error probability p_e, the threshold makes the
false-alarm rate exactly p_e, and the minimum beamforming-SNR factor nu* makes
the misdetection rate equal p_e as well.  nu* then fixes the beacon energy
floor per squared radian of beam solid width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

TWO_PI = 2.0 * math.pi


def threshold(p_e: float) -> float:
    """Detection threshold with false-alarm probability exactly p_e."""
    if not 0.0 < p_e < 1.0:
        raise ValueError(f"error target must lie in (0, 1), got {p_e}")
    return -math.log(p_e)


def p_fa(tau_th: float) -> float:
    """False-alarm probability of the threshold test (noise-only statistic)."""
    if tau_th < 0.0:
        raise ValueError("threshold cannot be negative")
    return math.exp(-tau_th)


def _poisson_mixture(a: float, b: float, lower: bool) -> float:
    """Marcum core: mix gamma CDF/CCDF terms with Poisson(a^2/2) weights.

    Weights are evaluated in the log domain, so the series stays accurate for
    large noncentrality without a separate asymptotic branch.
    """
    alpha = 0.5 * a * a
    beta = 0.5 * b * b
    if alpha == 0.0:
        g = special.gammainc(1.0, beta)
        return float(g) if lower else float(1.0 - g)
    half_width = max(40.0, 12.0 * math.sqrt(alpha))
    k_lo = max(0, int(math.floor(alpha - half_width)))
    k_hi = int(math.ceil(alpha + half_width))
    k = np.arange(k_lo, k_hi + 1, dtype=float)
    log_w = k * math.log(alpha) - alpha - special.gammaln(k + 1.0)
    w = np.exp(log_w)
    if lower:
        terms = special.gammainc(k + 1.0, beta)
    else:
        terms = special.gammaincc(k + 1.0, beta)
    val = float(np.dot(w, terms))
    # mass clipped outside [k_lo, k_hi] is < 1e-18 relative; clamp rounding
    return min(max(val, 0.0), 1.0)


def marcum_q1(a: float, b: float) -> float:
    """First-order Marcum Q: survival at b^2 of a noncentral chi-square with
    2 degrees of freedom and noncentrality a^2."""
    if a < 0.0 or b < 0.0:
        raise ValueError("arguments must be nonnegative")
    if b == 0.0:
        return 1.0
    if a == 0.0:
        return math.exp(-0.5 * b * b)
    return _poisson_mixture(a, b, lower=False)


def marcum_q1_complement(a: float, b: float) -> float:
    """1 - Q1(a, b), computed without cancellation for small complements."""
    if a < 0.0 or b < 0.0:
        raise ValueError("arguments must be nonnegative")
    if b == 0.0:
        return 0.0
    if a == 0.0:
        return -math.expm1(-0.5 * b * b)
    return _poisson_mixture(a, b, lower=True)


def p_md(nu: float, tau_th: float, gamma_hat: float, sigma_e2: float,
         s_energy: float) -> float:
    """Misdetection probability of the threshold test at SNR factor nu.

    Strictly decreasing in nu; at nu = 0 it equals 1 - exp(-tau_th).
    """
    if min(nu, tau_th, gamma_hat, sigma_e2, s_energy) < 0.0:
        raise ValueError("all detection arguments must be nonnegative")
    kappa = nu * s_energy
    denom = 1.0 + kappa * sigma_e2
    a = math.sqrt(2.0 * gamma_hat * kappa / denom)
    b = math.sqrt(2.0 * tau_th / denom)
    return marcum_q1_complement(a, b)


def solve_nu_star(p_e: float, gamma_hat: float, sigma_e2: float,
                  s_energy: float, rel_tol: float = 1e-12) -> float:
    """Smallest SNR factor with misdetection probability p_e.

    p_md is monotone decreasing in nu, so a bracketing bisection converges to
    the unique root of p_md(nu) = p_e.
    """
    if not 0.0 < p_e < 0.5:
        raise ValueError("target must lie in (0, 0.5) for the root to exist")
    if sigma_e2 <= 0.0 and gamma_hat <= 0.0:
        raise ValueError("channel statistics leave the detector blind")
    tau = threshold(p_e)

    def miss(nu):
        return p_md(nu, tau, gamma_hat, sigma_e2, s_energy)

    hi = 1.0
    while miss(hi) > p_e:
        hi *= 2.0
        if hi > 1e30:
            raise RuntimeError("failed to bracket the detection design point")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if miss(mid) > p_e:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * hi:
            break
    return hi


def phi_s_density(nu_star: float, n0: float, w_tot: float, t_symbol: float,
                  s_energy: float) -> float:
    """Beacon energy floor per squared radian: N0 W nu* T_sy ||s||^2 / (2 pi)^2."""
    if nu_star <= 0.0:
        raise ValueError("SNR factor must be positive")
    return n0 * w_tot * nu_star * t_symbol * s_energy / TWO_PI ** 2


@dataclass(frozen=True)
class DetectionDesign:
    """Threshold, design SNR factor and beacon energy floor for a target p_e."""

    p_e: float
    tau_th: float
    nu_star: float
    kappa_star: float      # nu* ||s||^2, the detector-facing SNR product
    phi_s: float           # effective J/rad^2 used for energy accounting
    phi_s_formula: float   # value from the closed form, kept for reporting
    gamma_hat: float
    sigma_e2: float
    s_energy: float

    def beacon_snr_product(self, energy: float, beam_measure: float) -> float:
        """kappa = nu ||s||^2 achieved by a beacon of given energy and beam.

        Scales linearly in energy per rad^2; beacons at the energy floor hit
        kappa_star exactly, i.e. the calibrated design point.
        """
        if beam_measure <= 0.0:
            raise ValueError("beam measure must be positive")
        return self.kappa_star * energy / (self.phi_s * beam_measure)

    def miss_probability(self, kappa: float) -> float:
        denom = 1.0 + kappa * self.sigma_e2
        a = math.sqrt(2.0 * self.gamma_hat * kappa / denom)
        b = math.sqrt(2.0 * self.tau_th / denom)
        return marcum_q1_complement(a, b)


def design_detection(params) -> DetectionDesign:
    """Solve the detection design for a SystemParams instance.

    If params.phi_s_override is set, that value replaces the closed-form
    energy floor in all accounting (calibration mode); the threshold and
    design SNR factor are unaffected.
    """
    sigma_e2 = params.effective_sigma_e2()
    tau = threshold(params.p_e)
    nu_star = solve_nu_star(params.p_e, params.gamma_hat, sigma_e2, params.s_energy)
    phi_formula = phi_s_density(nu_star, params.n0, params.w_tot,
                                params.t_symbol, params.s_energy)
    phi_eff = params.phi_s_override if params.phi_s_override is not None else phi_formula
    return DetectionDesign(
        p_e=params.p_e,
        tau_th=tau,
        nu_star=nu_star,
        kappa_star=nu_star * params.s_energy,
        phi_s=phi_eff,
        phi_s_formula=phi_formula,
        gamma_hat=params.gamma_hat,
        sigma_e2=sigma_e2,
        s_energy=params.s_energy,
    )
