"""Exact arithmetic on unions of half-open angular intervals in (-pi, pi].

Uncertainty regions and beams are both represented as AngleSet: an ordered
union of disjoint [lo, hi) intervals.  Sets never wrap across the +/-pi seam;
inputs are expected pre-normalized.  All operations are pure and return new
objects, so values can be shared freely across threads.
"""

from __future__ import annotations

import bisect
import math

FULL_LO = -math.pi
FULL_HI = math.pi

# absolute tolerance for measure identities (fractional cuts, mass budgets)
MEASURE_TOL = 1e-12


class AngleSet:
    """Union of disjoint, non-adjacent half-open intervals inside (-pi, pi]."""

    __slots__ = ("intervals", "_measure")

    def __init__(self, intervals=()):
        norm = _normalize(intervals)
        object.__setattr__(self, "intervals", norm)
        object.__setattr__(self, "_measure", math.fsum(hi - lo for lo, hi in norm))

    def __setattr__(self, name, value):
        raise AttributeError("AngleSet is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def interval(cls, lo: float, hi: float) -> "AngleSet":
        return cls(((lo, hi),))

    @classmethod
    def full_circle(cls) -> "AngleSet":
        return cls(((FULL_LO, FULL_HI),))

    @classmethod
    def empty(cls) -> "AngleSet":
        return cls(())

    # -- basic queries -------------------------------------------------------

    def measure(self) -> float:
        return self._measure

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, theta: float) -> bool:
        """True iff theta lies in some stored [lo, hi)."""
        idx = bisect.bisect_right(self.intervals, (theta, math.inf)) - 1
        if idx < 0:
            return False
        lo, hi = self.intervals[idx]
        return lo <= theta < hi

    def is_subset_of(self, other: "AngleSet") -> bool:
        return self.intersect(other) == self

    def is_strict_subset_of(self, other: "AngleSet") -> bool:
        return self.is_subset_of(other) and self != other

    # -- set algebra ---------------------------------------------------------

    def intersect(self, other: "AngleSet") -> "AngleSet":
        out = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if hi > lo:
                out.append((lo, hi))
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return AngleSet(out)

    def subtract(self, other: "AngleSet") -> "AngleSet":
        out = []
        for lo, hi in self.intervals:
            cur = lo
            for blo, bhi in other.intervals:
                if bhi <= cur:
                    continue
                if blo >= hi:
                    break
                if blo > cur:
                    out.append((cur, blo))
                cur = max(cur, bhi)
                if cur >= hi:
                    break
            if cur < hi:
                out.append((cur, hi))
        return AngleSet(out)

    def union(self, other: "AngleSet") -> "AngleSet":
        return AngleSet(self.intervals + other.intervals)

    # -- fractional extraction ------------------------------------------------

    def take_fraction(self, rho: float) -> "AngleSet":
        """Lowest-angle subset with measure rho * measure(self).

        The lower-end convention makes every run reproducible; any subset of
        the right measure is equivalent for the protocols built on top.
        """
        if not 0.0 <= rho <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {rho}")
        if rho == 0.0:
            return AngleSet.empty()
        if self.is_empty():
            raise ValueError("cannot take a positive fraction of an empty set")
        if rho == 1.0:
            return self
        budget = rho * self._measure
        out = []
        for lo, hi in self.intervals:
            span = hi - lo
            if span < budget - MEASURE_TOL:
                out.append((lo, hi))
                budget -= span
            else:
                out.append((lo, lo + budget))
                return AngleSet(out)
        return AngleSet(out)

    # -- dunder ---------------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, AngleSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        if not self.intervals:
            return "AngleSet()"
        parts = ", ".join(f"[{lo:.6g}, {hi:.6g})" for lo, hi in self.intervals)
        return f"AngleSet({parts})"


def _normalize(intervals):
    """Sort, merge overlapping/adjacent pieces, drop empties, check the domain."""
    cleaned = []
    for lo, hi in intervals:
        lo = float(lo)
        hi = float(hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError("interval endpoints must be finite")
        if hi <= lo:
            if hi < lo:
                raise ValueError(f"interval has hi < lo: ({lo}, {hi})")
            continue  # empty
        if lo < FULL_LO - MEASURE_TOL or hi > FULL_HI + MEASURE_TOL:
            raise ValueError(f"interval ({lo}, {hi}) outside (-pi, pi]")
        cleaned.append((max(lo, FULL_LO), min(hi, FULL_HI)))
    cleaned.sort()
    merged = []
    for lo, hi in cleaned:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


class PiecewisePrior:
    """Piecewise-constant probability density over an AngleSet support.

    Pieces are (lo, hi, density) with strictly positive density; total mass
    integrates to 1.  Supports restriction (Bayes renormalization on a smaller
    support) and inverse-CDF sampling.
    """

    __slots__ = ("pieces", "support")

    def __init__(self, pieces):
        rows = sorted((float(lo), float(hi), float(d)) for lo, hi, d in pieces)
        kept = []
        for lo, hi, d in rows:
            if hi <= lo:
                continue
            if d <= 0.0:
                raise ValueError("density must be strictly positive on support")
            if kept and lo < kept[-1][1] - MEASURE_TOL:
                raise ValueError("prior pieces overlap")
            kept.append((lo, hi, d))
        if not kept:
            raise ValueError("prior needs at least one piece")
        mass = math.fsum((hi - lo) * d for lo, hi, d in kept)
        if abs(mass - 1.0) > 1e-12:
            raise ValueError(f"prior mass is {mass!r}, expected 1 within 1e-12")
        object.__setattr__(self, "pieces", tuple(kept))
        object.__setattr__(
            self, "support", AngleSet(tuple((lo, hi) for lo, hi, _ in kept))
        )

    def __setattr__(self, name, value):
        raise AttributeError("PiecewisePrior is immutable")

    @classmethod
    def uniform(cls, support: AngleSet) -> "PiecewisePrior":
        m = support.measure()
        if m <= 0.0:
            raise ValueError("uniform prior needs non-empty support")
        return cls([(lo, hi, 1.0 / m) for lo, hi in support.intervals])

    @classmethod
    def from_weights(cls, pieces) -> "PiecewisePrior":
        """Build from (lo, hi, weight) rows, normalizing total mass to 1."""
        total = math.fsum((hi - lo) * w for lo, hi, w in pieces)
        if total <= 0.0:
            raise ValueError("total weight must be positive")
        return cls([(lo, hi, w / total) for lo, hi, w in pieces])

    def density_at(self, theta: float) -> float:
        for lo, hi, d in self.pieces:
            if lo <= theta < hi:
                return d
        return 0.0

    def mass_of(self, region: AngleSet) -> float:
        """Probability mass of region under this prior."""
        total = 0.0
        for lo, hi, d in self.pieces:
            piece = AngleSet.interval(lo, hi)
            total += d * piece.intersect(region).measure()
        return total

    def restrict(self, new_support: AngleSet) -> "PiecewisePrior":
        """Condition on the event {theta in new_support} (Bayes update)."""
        rows = []
        for lo, hi, d in self.pieces:
            inter = AngleSet.interval(lo, hi).intersect(new_support)
            for ilo, ihi in inter.intervals:
                rows.append((ilo, ihi, d))
        if not rows:
            raise ValueError("restriction support has zero prior mass")
        return PiecewisePrior.from_weights(rows)

    def sample(self, rng) -> float:
        """Inverse-CDF draw."""
        u = rng.random()
        acc = 0.0
        for lo, hi, d in self.pieces:
            m = (hi - lo) * d
            if acc + m >= u or (lo, hi, d) == self.pieces[-1]:
                frac = min(max((u - acc) / m, 0.0), 1.0) if m > 0 else 0.0
                return lo + frac * (hi - lo)
            acc += m
        return self.pieces[-1][1]  # unreachable, defensive


def top_mass_subset(region: AngleSet, prior: PiecewisePrior, rho: float) -> AngleSet:
    """Subset of `region` with measure rho*|region| maximizing prior mass.

    Greedy by descending density, which is optimal for piecewise-constant
    densities; ties (and the uniform case) resolve to the lowest angles, so
    a uniform prior reproduces region.take_fraction(rho) exactly.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {rho}")
    if rho == 0.0:
        return AngleSet.empty()
    if region.is_empty():
        raise ValueError("cannot take a positive fraction of an empty set")

    # candidate pieces: prior pieces clipped to the region
    cands = []
    for lo, hi, d in prior.pieces:
        inter = AngleSet.interval(lo, hi).intersect(region)
        for ilo, ihi in inter.intervals:
            cands.append((-d, ilo, ihi))
    covered = math.fsum(ihi - ilo for _, ilo, ihi in cands)
    if covered < region.measure() - 1e-9:
        raise ValueError("prior support does not cover the region")
    cands.sort()

    budget = rho * region.measure()
    out = []
    for _, lo, hi in cands:
        span = hi - lo
        if span < budget - MEASURE_TOL:
            out.append((lo, hi))
            budget -= span
        else:
            out.append((lo, lo + budget))
            budget = 0.0
            break
    return AngleSet(out)
