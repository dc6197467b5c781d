import math
import random

import numpy as np
import pytest
from scipy import integrate, special, stats

from beamalign.detection import (DetectionDesign, design_detection, marcum_q1,
                                 marcum_q1_complement, p_fa, p_md,
                                 phi_s_density, solve_nu_star, threshold)
from beamalign.phy import SystemParams, dbm_to_watt


def marcum_oracle_quadrature(a, b):
    """Independent oracle: integrate the noncentral-chi-square density."""
    def pdf(x):
        return x * special.ive(0, a * x) * math.exp(-0.5 * (x - a) ** 2)

    val, _ = integrate.quad(pdf, b, max(b, a) + 60.0,
                            points=[a] if b < a < b + 60 else None, limit=400)
    return val


def marcum_oracle_bessel_series(a, b, terms=400):
    """Independent oracle: truncated Bessel-free double series."""
    alpha, beta = 0.5 * a * a, 0.5 * b * b
    total = 0.0
    w = math.exp(-alpha)
    inner = math.exp(-beta)
    c = inner  # partial Poisson CDF of beta at k
    for k in range(terms):
        total += w * c
        w *= alpha / (k + 1)
        inner *= beta / (k + 1)
        c += inner
    return total


def test_threshold_closed_forms():
    assert threshold(math.exp(-1.0)) == pytest.approx(1.0, abs=1e-15)
    assert threshold(1e-5) == pytest.approx(11.5129254649702, abs=1e-12)
    for pe in (0.3, 1e-3, 1e-7):
        assert p_fa(threshold(pe)) == pytest.approx(pe, rel=1e-14)
    with pytest.raises(ValueError):
        threshold(0.0)
    with pytest.raises(ValueError):
        threshold(1.5)


def test_marcum_closed_forms():
    assert marcum_q1(0.0, math.sqrt(2.0)) == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert marcum_q1(3.7, 0.0) == 1.0
    assert marcum_q1(0.0, 0.0) == 1.0


def test_marcum_dual_oracles_agree():
    cases = [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5), (3.0, 3.0), (5.0, 1.0),
             (1.0, 5.0), (8.0, 7.0), (0.1, 0.1)]
    for a, b in cases:
        quad_val = marcum_oracle_quadrature(a, b)
        series_val = marcum_oracle_bessel_series(a, b)
        assert quad_val == pytest.approx(series_val, abs=1e-10)
        assert marcum_q1(a, b) == pytest.approx(quad_val, abs=1e-10)
        # third, independent route via scipy's noncentral chi-square
        assert marcum_q1(a, b) == pytest.approx(
            stats.ncx2.sf(b * b, 2, a * a), rel=1e-9, abs=1e-12)


def test_marcum_complement_accuracy_in_tail():
    # complement stays accurate when Q1 is close to 1
    a, b = 9.0, 1.0
    direct = marcum_q1_complement(a, b)
    ref = stats.ncx2.cdf(b * b, 2, a * a)
    assert direct == pytest.approx(ref, rel=1e-9)
    assert 0.0 < direct < 1e-10
    assert marcum_q1(a, b) + marcum_q1_complement(a, b) == pytest.approx(1.0, abs=1e-13)


def test_marcum_monotonicity_grids():
    a_grid = [0.0, 0.3, 1.0, 2.5, 6.0, 12.0]
    b_grid = [0.0, 0.2, 0.9, 2.0, 5.0, 11.0]
    for b in b_grid:
        vals = [marcum_q1(a, b) for a in a_grid]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert all(x <= y + 1e-13 for x, y in zip(vals, vals[1:]))
    for a in a_grid:
        vals = [marcum_q1(a, b) for b in b_grid]
        assert all(x >= y - 1e-13 for x, y in zip(vals, vals[1:]))


def test_marcum_large_arguments():
    # log-domain weights keep the series finite far from the origin
    for a, b in [(40.0, 35.0), (35.0, 40.0), (60.0, 59.0)]:
        v = marcum_q1(a, b)
        assert 0.0 <= v <= 1.0
        assert v == pytest.approx(stats.ncx2.sf(b * b, 2, a * a), rel=1e-8, abs=1e-12)


def test_p_md_limits():
    tau = threshold(1e-4)
    assert p_md(0.0, tau, 0.3, 0.7, 1.0) == pytest.approx(1.0 - math.exp(-tau), rel=1e-12)
    # no-CSI closed form
    for nu in (1.0, 10.0, 1e4):
        got = p_md(nu, tau, 0.0, 1.0, 1.0)
        want = 1.0 - math.exp(-tau / (1.0 + nu))
        assert got == pytest.approx(want, rel=1e-11)
    # large nu with estimation noise drives misses to zero
    assert p_md(1e12, tau, 0.0, 1.0, 1.0) < 1e-10


def test_p_md_decreasing_in_nu():
    tau = threshold(1e-3)
    nus = [0.0, 0.1, 1.0, 10.0, 100.0, 1e4]
    vals = [p_md(nu, tau, 0.5, 0.25, 2.0) for nu in nus]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_solve_nu_star_rayleigh_closed_form():
    # no-CSI oracle: nu* = [tau/(-ln(1-pe)) - 1] / (sigma_e2 * s_energy)
    for pe in (1e-5, 1e-3, 0.05):
        for se2 in (1.0, 0.01, 3.0):
            nu = solve_nu_star(pe, 0.0, se2, 1.0)
            tau = threshold(pe)
            want = (tau / (-math.log1p(-pe)) - 1.0) / se2
            assert nu == pytest.approx(want, rel=1e-9)
    nu = solve_nu_star(1e-5, 0.0, 1.0, 1.0)
    assert nu == pytest.approx(1.1512867e6, rel=1e-4)


def test_solve_nu_star_monotone_in_pe():
    hi = solve_nu_star(1e-3, 0.0, 1.0, 1.0)
    lo = solve_nu_star(1e-5, 0.0, 1.0, 1.0)
    assert hi < lo


def test_solve_nu_star_round_trip():
    rng = random.Random(2)
    for _ in range(25):
        pe = 10 ** rng.uniform(-7, -0.5)
        if pe >= 0.5:
            continue
        gh = rng.choice([0.0, rng.uniform(0.0, 2.0)])
        se2 = rng.uniform(0.01, 2.0)
        s_en = rng.uniform(0.5, 4.0)
        nu = solve_nu_star(pe, gh, se2, s_en)
        assert p_md(nu, threshold(pe), gh, se2, s_en) == pytest.approx(pe, rel=1e-8)


def test_solve_nu_star_infeasible():
    with pytest.raises(ValueError):
        solve_nu_star(0.6, 0.0, 1.0, 1.0)


def test_phi_s_scalings_and_override():
    base = phi_s_density(1e6, 5e-21, 5e8, 2e-9, 1.0)
    assert phi_s_density(2e6, 5e-21, 5e8, 2e-9, 1.0) == pytest.approx(2 * base, rel=1e-14)
    assert phi_s_density(1e6, 5e-21, 5e8, 4e-9, 2.0) == pytest.approx(4 * base, rel=1e-14)
    with pytest.raises(ValueError):
        phi_s_density(0.0, 5e-21, 5e8, 2e-9, 1.0)

    params = SystemParams(phi_s_override=dbm_to_watt(-94.0))
    des = design_detection(params)
    assert des.phi_s == pytest.approx(dbm_to_watt(-94.0), rel=1e-12)
    assert des.phi_s_formula != des.phi_s
    # floor-energy beacons land exactly on the design SNR product
    kappa = des.beacon_snr_product(des.phi_s * 0.123, 0.123)
    assert kappa == pytest.approx(des.kappa_star, rel=1e-12)


def test_design_detection_consistency():
    params = SystemParams()
    des = design_detection(params)
    assert des.tau_th == pytest.approx(-math.log(params.p_e), rel=1e-14)
    assert des.miss_probability(des.kappa_star) == pytest.approx(params.p_e, rel=1e-8)
