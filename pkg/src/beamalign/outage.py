"""Channel-gain CCDF machinery and the outage-constrained data-beam design.

The posterior of the channel gain given its estimate is noncentral: its CCDF
is a Marcum Q.  The data beam covers a fraction theta of the uncertainty
region, where theta trades beamforming gain against residual misalignment
risk; q* maximizes q * inv_ccdf(q) over [1-eps, 1] and theta = (1-eps)/q*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .detection import marcum_q1

TWO_PI = 2.0 * math.pi
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def ccdf_gamma(x: float, gamma_hat: float, sigma_e2: float) -> float:
    """P(gamma >= x) for the posterior gain given estimate gamma_hat.

    sigma_e2 = 0 degenerates to a unit step at gamma_hat (perfect CSI).
    """
    if x < 0.0:
        raise ValueError("gain argument cannot be negative")
    if sigma_e2 < 0.0:
        raise ValueError("variance cannot be negative")
    if sigma_e2 == 0.0:
        return 1.0 if x <= gamma_hat else 0.0
    a = math.sqrt(2.0 * gamma_hat / sigma_e2)
    b = math.sqrt(2.0 * x / sigma_e2)
    return marcum_q1(a, b)


def inv_ccdf_gamma(q: float, gamma_hat: float, sigma_e2: float,
                   rel_tol: float = 1e-12) -> float:
    """Inverse of ccdf_gamma in its first argument (monotone bracketing).

    Satisfies ccdf_gamma(inv_ccdf_gamma(q)) = q to ~1e-10 relative.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"quantile must lie in (0, 1], got {q}")
    if q == 1.0:
        return 0.0
    if sigma_e2 == 0.0:
        return gamma_hat
    if gamma_hat == 0.0:
        # Rayleigh posterior: exponential tail inverts in closed form
        return -sigma_e2 * math.log(q)
    hi = gamma_hat + sigma_e2
    while ccdf_gamma(hi, gamma_hat, sigma_e2) > q:
        hi *= 2.0
        if hi > 1e12 * (gamma_hat + sigma_e2):
            raise RuntimeError("failed to bracket the inverse CCDF")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ccdf_gamma(mid, gamma_hat, sigma_e2) > q:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rel_tol * max(hi, 1e-300):
            break
    return 0.5 * (lo + hi)


def q_star_and_theta(eps: float, gamma_hat: float, sigma_e2: float,
                     grid_step: float = 1e-4) -> tuple:
    """Maximize q * inv_ccdf(q) over [1-eps, 1]; return (q*, theta).

    Coarse grid scan then golden-section refinement; ties resolve toward the
    smaller q so the uniform/Rayleigh case lands exactly on q* = 1-eps.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("outage target must lie in (0, 1)")
    lo = 1.0 - eps

    def objective(q):
        return q * inv_ccdf_gamma(q, gamma_hat, sigma_e2)

    n = max(2, int(math.ceil(eps / grid_step)) + 1)
    qs = [lo + (1.0 - lo) * i / (n - 1) for i in range(n)]
    vals = [objective(q) for q in qs]
    best = max(range(n), key=lambda i: (vals[i], -qs[i]))
    if vals[best] <= vals[0] * (1.0 + 1e-12):
        # flat or decreasing objective: smallest q wins outright
        q_star = lo
    else:
        a = qs[max(best - 1, 0)]
        b = qs[min(best + 1, n - 1)]
        q_star = _golden_max(objective, a, b)
        if objective(lo) >= objective(q_star):
            q_star = lo
    return q_star, (1.0 - eps) / q_star


def _golden_max(f, a: float, b: float, tol: float = 1e-10) -> float:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def psi_d(rate: float, n0: float, w_tot: float, slot_time: float) -> float:
    """Energy per squared radian to sustain `rate` for one slot when the
    inverse-CCDF factor is unity: (2 pi)^-2 N0 W T (2^(R/W) - 1).

    Zero at rate 0 and strictly convex increasing in the rate.
    """
    if rate < 0.0:
        raise ValueError("rate cannot be negative")
    x = rate / w_tot
    if x > 1023.0:
        return math.inf
    return n0 * w_tot * slot_time * (2.0 ** x - 1.0) / TWO_PI ** 2


@dataclass(frozen=True)
class OutageDesign:
    """Precomputed outage-constrained data-phase coefficients."""

    eps: float
    gamma_hat: float
    sigma_e2: float
    q_star: float
    theta: float                 # data-beam fraction of the uncertainty region
    inv_ccdf_at_q_star: float
    n0: float
    w_tot: float
    slot_time: float

    def psi_d(self, rate: float, duration: float | None = None) -> float:
        dur = self.slot_time if duration is None else duration
        return psi_d(rate, self.n0, self.w_tot, dur)

    def phi_d(self, rate: float, duration: float | None = None) -> float:
        """Energy per squared radian per slot to carry `rate` with outage
        probability eps: psi_d(R) (1-eps) / (q* inv_ccdf(q*))."""
        denom = self.q_star * self.inv_ccdf_at_q_star
        if denom <= 0.0:
            return math.inf if rate > 0.0 else 0.0
        return self.psi_d(rate, duration) * (1.0 - self.eps) / denom

    def inv_ccdf(self, q: float) -> float:
        return inv_ccdf_gamma(q, self.gamma_hat, self.sigma_e2)


def design_outage(params) -> OutageDesign:
    sigma_e2 = params.effective_sigma_e2()
    q_star, theta = q_star_and_theta(params.eps_outage, params.gamma_hat, sigma_e2)
    return OutageDesign(
        eps=params.eps_outage,
        gamma_hat=params.gamma_hat,
        sigma_e2=sigma_e2,
        q_star=q_star,
        theta=theta,
        inv_ccdf_at_q_star=inv_ccdf_gamma(q_star, params.gamma_hat, sigma_e2),
        n0=params.n0,
        w_tot=params.w_tot,
        slot_time=params.slot_time,
    )


def outage_capacity(power: float, beam_measure: float, align_prob: float,
                    gamma_hat: float, sigma_e2: float, eps: float,
                    n0: float, w_tot: float) -> float:
    """Largest rate whose failure probability (fading + misalignment) <= eps.

    Requires align_prob >= 1 - eps; at equality the usable quantile is 1 and
    the capacity collapses to zero.
    """
    if power < 0.0:
        raise ValueError("power cannot be negative")
    if beam_measure <= 0.0:
        raise ValueError("beam measure must be positive")
    if align_prob < (1.0 - eps) - 1e-15:
        raise ValueError(
            f"alignment probability {align_prob} cannot support outage target {eps}"
        )
    if power == 0.0:
        return 0.0
    q = min((1.0 - eps) / align_prob, 1.0)
    nu = TWO_PI ** 2 * power / (n0 * w_tot * beam_measure)
    return w_tot * math.log2(1.0 + nu * inv_ccdf_gamma(q, gamma_hat, sigma_e2))
