import math
import random

import pytest

from beamalign.angles import AngleSet, PiecewisePrior, top_mass_subset

PI = math.pi
TOL = 1e-12


def rand_angleset(rng, max_pieces=4):
    pts = sorted(rng.uniform(-PI, PI) for _ in range(2 * rng.randint(1, max_pieces)))
    return AngleSet(list(zip(pts[::2], pts[1::2])))


def test_measure_basics():
    assert AngleSet.full_circle().measure() == pytest.approx(2 * PI, abs=TOL)
    assert AngleSet.empty().measure() == 0.0
    assert AngleSet.interval(0, PI / 2).measure() == pytest.approx(PI / 2, abs=TOL)


def test_intersect_examples():
    a = AngleSet.interval(0, PI)
    b = AngleSet([(PI / 2, PI), (-PI, -PI / 2)])  # wrapped region given as two pieces
    assert a.intersect(b) == AngleSet.interval(PI / 2, PI)
    assert a.intersect(a) == a
    assert a.intersect(AngleSet.empty()) == AngleSet.empty()


def test_subtract_examples():
    a = AngleSet.interval(0, PI)
    assert a.subtract(AngleSet.interval(0, PI / 4)) == AngleSet.interval(PI / 4, PI)
    assert a.subtract(AngleSet.empty()) == a
    assert a.subtract(a) == AngleSet.empty()


def test_contains():
    a = AngleSet.interval(0, PI)
    assert a.contains(0.1)
    assert not a.contains(-0.1)
    assert not AngleSet.empty().contains(0.0)
    # half-open: lo in, hi out
    assert a.contains(0.0)
    assert not a.contains(PI)


def test_take_fraction_lower_end():
    a = AngleSet.interval(0, PI)
    assert a.take_fraction(0.5) == AngleSet.interval(0, PI / 2)
    assert a.take_fraction(0.0) == AngleSet.empty()
    two = AngleSet([(-1, 0), (1, 2)])
    got = two.take_fraction(0.75)
    assert got == AngleSet([(-1, 0), (1, 1.5)])


def test_take_fraction_errors():
    with pytest.raises(ValueError):
        AngleSet.empty().take_fraction(0.3)
    with pytest.raises(ValueError):
        AngleSet.interval(0, 1).take_fraction(1.5)


def test_canonicalization_identical_forms():
    rng = random.Random(7)
    for _ in range(50):
        base = rand_angleset(rng)
        pieces = list(base.intervals)
        # split some pieces into touching/overlapping fragments and shuffle
        frags = []
        for lo, hi in pieces:
            mid = lo + (hi - lo) * rng.uniform(0.2, 0.8)
            frags.append((lo, mid))
            frags.append((mid, hi))
            if rng.random() < 0.5:
                frags.append((lo, lo + (hi - lo) * rng.uniform(0.1, 0.9)))
        rng.shuffle(frags)
        assert AngleSet(frags) == base


def test_measure_partition_identity():
    rng = random.Random(3)
    for _ in range(200):
        a = rand_angleset(rng)
        b = rand_angleset(rng)
        inter = a.intersect(b).measure()
        diff = a.subtract(b).measure()
        assert inter + diff == pytest.approx(a.measure(), abs=TOL)


def test_take_fraction_measure_and_subset():
    rng = random.Random(11)
    for _ in range(200):
        a = rand_angleset(rng)
        rho = rng.random()
        s = a.take_fraction(rho)
        assert s.is_subset_of(a)
        assert s.measure() == pytest.approx(rho * a.measure(), abs=TOL)


def test_invalid_intervals_rejected():
    with pytest.raises(ValueError):
        AngleSet([(1.0, 0.5)])
    with pytest.raises(ValueError):
        AngleSet([(0.0, 4.0)])  # beyond pi


def test_prior_validation():
    with pytest.raises(ValueError):
        PiecewisePrior([(0, 1, 0.5)])  # mass != 1
    with pytest.raises(ValueError):
        PiecewisePrior([(0, 1, -1.0), (1, 2, 2.0)])
    p = PiecewisePrior([(0, 1, 0.25), (1, 2, 0.75)])
    assert p.mass_of(AngleSet.interval(0, 2)) == pytest.approx(1.0, abs=TOL)


def test_prior_restrict_renormalizes():
    p = PiecewisePrior([(0, 1, 0.25), (1, 2, 0.75)])
    q = p.restrict(AngleSet.interval(1, 2))
    assert q.mass_of(AngleSet.interval(1, 2)) == pytest.approx(1.0, abs=TOL)
    assert q.mass_of(AngleSet.interval(0, 1)) == 0.0


def test_prior_sampling_matches_masses():
    rng = random.Random(5)
    p = PiecewisePrior([(0, 1, 0.25), (1, 2, 0.75)])
    n = 20000
    hits = sum(1 for _ in range(n) if p.sample(rng) >= 1.0)
    assert abs(hits / n - 0.75) < 0.02


def test_top_mass_uniform_degenerates_to_take_fraction():
    a = AngleSet([(-1, 0), (1, 2)])
    f = PiecewisePrior.uniform(a)
    for rho in (0.1, 0.5, 0.9):
        assert top_mass_subset(a, f, rho) == a.take_fraction(rho)


def test_top_mass_two_piece_example():
    # density 1.5/|A| on the left half, 0.5/|A| on the right half of [0, 2)
    a = AngleSet.interval(0, 2)
    f = PiecewisePrior([(0, 1, 0.75), (1, 2, 0.25)])
    got = top_mass_subset(a, f, 0.5)
    assert got == AngleSet.interval(0, 1)
    assert f.mass_of(got) == pytest.approx(0.75, abs=TOL)
    # brute-force oracle: scan every contiguous window of half measure
    best = 0.0
    for i in range(2001):
        lo = i * 2.0 / 2000
        if lo + 1.0 > 2.0:
            break
        best = max(best, f.mass_of(AngleSet.interval(lo, lo + 1.0)))
    assert f.mass_of(got) >= best - 1e-9


def test_top_mass_beats_fraction_lower_bound():
    # mass of the selected subset is at least rho, tight iff uniform
    rng = random.Random(23)
    for _ in range(100):
        edges = sorted(rng.uniform(-PI, PI) for _ in range(4))
        a = AngleSet([(edges[0], edges[1]), (edges[2], edges[3])])
        if a.measure() < 1e-3:
            continue
        weights = []
        for lo, hi in a.intervals:
            mid = (lo + hi) / 2
            weights.append((lo, mid, rng.uniform(0.1, 5.0)))
            weights.append((mid, hi, rng.uniform(0.1, 5.0)))
        f = PiecewisePrior.from_weights(weights)
        rho = rng.uniform(0.05, 0.95)
        s = top_mass_subset(a, f, rho)
        assert s.is_subset_of(a)
        assert s.measure() == pytest.approx(rho * a.measure(), abs=TOL)
        assert f.mass_of(s) >= rho - 1e-9
