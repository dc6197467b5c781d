"""Slot-by-slot protocol policies.

Every policy runs on the same slotted frame: each alignment slot carries one
beacon (the ACK/NACK or comparison feedback returns within the slot that
completes the decision, which is why a slot must fit a beacon plus feedback),
and once a policy switches to data communication it transmits at constant
rate until the end of the frame.  Alignment beacons ride exactly at the
detection energy floor, so every scheme pays the same energy per probed
squared radian.

Policies are per-frame objects: construct (or reuse via begin_frame) one per
simulated frame.  They interact with the simulator through
`next_action()` / `observe()` and an error-model handle that turns beacon
truths into ACK/NACK or comparison outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .angles import AngleSet, PiecewisePrior, top_mass_subset
from .detection import DetectionDesign
from .outage import OutageDesign
from .planner import Schedule


@dataclass(frozen=True)
class AlignProbe:
    """One alignment slot: a single beacon at the energy floor."""

    beam_t: AngleSet
    beam_r: AngleSet
    energy: float

    @property
    def beam_measure(self) -> float:
        return self.beam_t.measure() * self.beam_r.measure()

    @property
    def power(self) -> float:
        return self.energy  # divided by t_beacon at the reporting boundary


@dataclass(frozen=True)
class DataPhase:
    """Terminal descriptor: identical data slots until the end of the frame."""

    rate: float
    beam_t: AngleSet
    beam_r: AngleSet
    energy_per_slot: float
    n_slots: int


class _PolicyBase:
    name = "base"

    def __init__(self, params, schedule: Schedule, detection: DetectionDesign,
                 outage: OutageDesign):
        self.params = params
        self.schedule = schedule
        self.detection = detection
        self.outage = outage

    # alignment slots the policy will consume (upper bound, for feasibility)
    def max_align_slots(self) -> int:
        raise NotImplementedError

    def begin_frame(self, errmodel) -> None:
        self.errmodel = errmodel
        self.u_t = self.params.u_t0
        self.u_r = self.params.u_r0
        self.slots_used = 0

    def supports(self):
        return self.u_t, self.u_r

    # -- shared helpers -------------------------------------------------------

    def _floor_probe(self, beam_t: AngleSet, beam_r: AngleSet) -> AlignProbe:
        energy = self.detection.phi_s * beam_t.measure() * beam_r.measure()
        return AlignProbe(beam_t=beam_t, beam_r=beam_r, energy=energy)

    def _data_rate(self) -> float:
        n = self.params.n_slots
        used = self.slots_used
        if used >= n:
            raise RuntimeError("alignment consumed the whole frame")
        return n * self.params.r_min / (n - used)

    def _uniform_data_phase(self) -> DataPhase:
        """Theta-sized beam out of the current support, uniform belief."""
        rate = self._data_rate()
        beam_t = self.u_t
        beam_r = self.u_r.take_fraction(self.outage.theta)
        support_measure = self.u_t.measure() * self.u_r.measure()
        energy = self.outage.phi_d(rate) * support_measure
        return DataPhase(
            rate=rate,
            beam_t=beam_t,
            beam_r=beam_r,
            energy_per_slot=energy,
            n_slots=self.params.n_slots - self.slots_used,
        )


class FractionalSearchPolicy(_PolicyBase):
    """Optimal decoupled fractional search under a uniform prior.

    Alternates departure-side and arrival-side probes (configurable start),
    probing the lowest-angle fraction rho_k of the active support; after the
    planned number of alignment slots it transmits at the compressed rate.
    """

    name = "dfs"

    def __init__(self, params, schedule, detection, outage, start_dim: str = "t"):
        super().__init__(params, schedule, detection, outage)
        if start_dim not in ("t", "r"):
            raise ValueError("start_dim must be 't' or 'r'")
        self.start_dim = start_dim
        self._pending_dim = None

    def max_align_slots(self) -> int:
        return self.schedule.l_star

    def _probe_dim(self, k: int) -> str:
        first = self.start_dim == "t"
        return ("t" if first else "r") if k % 2 == 0 else ("r" if first else "t")

    def _probe_beam(self, support: AngleSet, rho: float, dim: str) -> AngleSet:
        return support.take_fraction(rho)

    def next_action(self):
        k = self.slots_used
        if k < self.schedule.l_star:
            rho = self.schedule.rho[k]
            if not 0.0 < rho < 0.5:
                raise RuntimeError(f"degenerate probe fraction {rho} at slot {k}")
            dim = self._probe_dim(k)
            if dim == "t":
                beam_t = self._probe_beam(self.u_t, rho, dim)
                beam_r = self.u_r
                assert beam_t.is_strict_subset_of(self.u_t)
            else:
                beam_t = self.u_t
                beam_r = self._probe_beam(self.u_r, rho, dim)
                assert beam_r.is_strict_subset_of(self.u_r)
            self._pending_dim = dim
            self._pending_beam = beam_t if dim == "t" else beam_r
            return self._floor_probe(beam_t, beam_r)
        return self._make_data_phase()

    def _make_data_phase(self) -> DataPhase:
        return self._uniform_data_phase()

    def observe(self, obs) -> None:
        ack = obs.detected
        dim = self._pending_dim
        beam = self._pending_beam
        if dim == "t":
            self.u_t = self.u_t.intersect(beam) if ack else self.u_t.subtract(beam)
        else:
            self.u_r = self.u_r.intersect(beam) if ack else self.u_r.subtract(beam)
        self.slots_used += 1
        self._after_update(dim, ack)

    def _after_update(self, dim: str, ack: bool) -> None:
        pass


class NonuniformFractionalSearchPolicy(FractionalSearchPolicy):
    """Fractional search steered by a non-uniform product-form prior.

    Probe beams keep the scheduled measures but collect the highest-density
    angles first, which can only raise the ACK probability above rho_k; data
    beams maximize posterior mass at the fixed measure product, which can
    only lower the data energy below the uniform-prior cost.
    """

    name = "dfs-nonuniform"

    def __init__(self, params, schedule, detection, outage,
                 prior_t: PiecewisePrior, prior_r: PiecewisePrior,
                 start_dim: str = "t"):
        super().__init__(params, schedule, detection, outage, start_dim)
        if not params.u_t0.is_subset_of(prior_t.support):
            raise ValueError("departure prior must cover the initial support")
        if not params.u_r0.is_subset_of(prior_r.support):
            raise ValueError("arrival prior must cover the initial support")
        self.prior_t = prior_t
        self.prior_r = prior_r

    def _probe_beam(self, support: AngleSet, rho: float, dim: str) -> AngleSet:
        prior = self.prior_t if dim == "t" else self.prior_r
        return top_mass_subset(support, prior, rho)

    def _posterior_mass(self, dim: str, region: AngleSet) -> float:
        prior = self.prior_t if dim == "t" else self.prior_r
        support = self.u_t if dim == "t" else self.u_r
        denom = prior.mass_of(support)
        return prior.mass_of(region.intersect(support)) / denom

    def _make_data_phase(self) -> DataPhase:
        rate = self._data_rate()
        theta = self.outage.theta
        if theta >= 1.0:
            beam_t, beam_r = self.u_t, self.u_r
        else:
            beam_t, beam_r = self._best_rectangle(theta)
        mass = self._posterior_mass("t", beam_t) * self._posterior_mass("r", beam_r)
        mass = min(mass, 1.0)
        q = (1.0 - self.outage.eps) / mass
        beam_measure = beam_t.measure() * beam_r.measure()
        energy = self.outage.psi_d(rate) * beam_measure / self.outage.inv_ccdf(q)
        return DataPhase(
            rate=rate,
            beam_t=beam_t,
            beam_r=beam_r,
            energy_per_slot=energy,
            n_slots=self.params.n_slots - self.slots_used,
        )

    def _best_rectangle(self, theta: float):
        """Split the measure budget across the two dimensions to maximize the
        posterior rectangle mass; densities are piecewise-constant, so a grid
        scan with local refinement is adequate."""

        def mass_for(frac_t: float):
            frac_r = theta / frac_t
            bt = top_mass_subset(self.u_t, self.prior_t, frac_t)
            br = top_mass_subset(self.u_r, self.prior_r, frac_r)
            return self._posterior_mass("t", bt) * self._posterior_mass("r", br), bt, br

        best = None
        n_grid = 65
        for i in range(n_grid):
            frac_t = theta + (1.0 - theta) * i / (n_grid - 1)
            frac_t = min(max(frac_t, theta), 1.0)
            m, bt, br = mass_for(frac_t)
            if best is None or m > best[0] + 1e-15:
                best = (m, bt, br)
        return best[1], best[2]


class BisectionPolicy(_PolicyBase):
    """Reference search that splits the active support into two equal halves
    and keeps the half with the stronger beacon response.

    Each level spends two beacon slots (one per half); dimensions alternate.
    After the depth budget it behaves like the other policies' data phase.
    """

    name = "bisection"

    def __init__(self, params, schedule, detection, outage, depth: int | None = None):
        super().__init__(params, schedule, detection, outage)
        self.depth = params.l_max if depth is None else depth
        if self.depth < 0 or 2 * self.depth > params.n_slots - 1:
            raise ValueError("bisection depth does not fit in the frame")

    def max_align_slots(self) -> int:
        return 2 * self.depth

    def begin_frame(self, errmodel) -> None:
        super().begin_frame(errmodel)
        self.level = 0
        self._pending = None  # (dim, half_a, obs_a) while waiting for half B

    def next_action(self):
        if self.level < self.depth:
            dim = "t" if self.level % 2 == 0 else "r"
            support = self.u_t if dim == "t" else self.u_r
            if self._pending is None:
                half_a = support.take_fraction(0.5)
                self._halves = (half_a, support.subtract(half_a))
                self._dim = dim
                beam = self._halves[0]
            else:
                beam = self._halves[1]
            if dim == "t":
                return self._floor_probe(beam, self.u_r)
            return self._floor_probe(self.u_t, beam)
        return self._uniform_data_phase()

    def observe(self, obs) -> None:
        self.slots_used += 1
        if self._pending is None:
            self._pending = obs
            return
        first_wins = self.errmodel.compare(self._pending, obs)
        winner = self._halves[0] if first_wins else self._halves[1]
        if self._dim == "t":
            self.u_t = winner
        else:
            self.u_r = winner
        self._pending = None
        self.level += 1


class ExhaustiveSearchPolicy(_PolicyBase):
    """Sector sweeps over both ends.

    Conventional mode scans every departure sector (arrival side listening
    over its whole prior support), picks the strongest, then scans every
    arrival sector with the winner fixed; feedback happens once per sweep.
    Interactive mode gets per-beacon feedback and stops a sweep at the first
    ACK.  If a sweep never fires, the last sector is kept so the data phase
    geometry stays uniform across frames.
    """

    def __init__(self, params, schedule, detection, outage,
                 interactive: bool, n_bs: int = 32, n_ue: int = 32):
        super().__init__(params, schedule, detection, outage)
        if n_bs < 1 or n_ue < 1:
            raise ValueError("sector counts must be at least 1")
        if n_bs + n_ue > params.n_slots - 1:
            raise ValueError("sector sweeps do not fit in the frame")
        self.interactive = interactive
        self.n_bs = n_bs
        self.n_ue = n_ue
        self.name = "ies" if interactive else "ces"
        self.sectors_t = _equal_sectors(params.u_t0, n_bs)
        self.sectors_r = _equal_sectors(params.u_r0, n_ue)

    def max_align_slots(self) -> int:
        return self.n_bs + self.n_ue

    def begin_frame(self, errmodel) -> None:
        super().begin_frame(errmodel)
        self.stage = 0           # 0: departure sweep, 1: arrival sweep, 2: data
        self.scan_idx = 0
        self.obs_buf = []
        self.winner_t = None
        self.winner_r = None

    def next_action(self):
        if self.stage == 0:
            return self._floor_probe(self.sectors_t[self.scan_idx], self.params.u_r0)
        if self.stage == 1:
            return self._floor_probe(self.winner_t, self.sectors_r[self.scan_idx])
        return self._final_data_phase()

    def observe(self, obs) -> None:
        self.slots_used += 1
        sectors = self.sectors_t if self.stage == 0 else self.sectors_r
        done = False
        if self.interactive:
            if obs.detected:
                winner = sectors[self.scan_idx]
                done = True
            elif self.scan_idx == len(sectors) - 1:
                winner = sectors[-1]  # no ACK anywhere: keep the last sector
                done = True
        else:
            self.obs_buf.append(obs)
            if self.scan_idx == len(sectors) - 1:
                winner = sectors[self.errmodel.select_strongest(self.obs_buf)]
                done = True
        if done:
            if self.stage == 0:
                self.winner_t = winner
            else:
                self.winner_r = winner
            self.stage += 1
            self.scan_idx = 0
            self.obs_buf = []
        else:
            self.scan_idx += 1

    def _final_data_phase(self) -> DataPhase:
        self.u_t = self.winner_t
        self.u_r = self.winner_r
        return self._uniform_data_phase()


def _equal_sectors(support: AngleSet, n: int):
    total = support.measure()
    cuts = [support.take_fraction(i / n) for i in range(n + 1)]
    sectors = []
    for i in range(n):
        sector = cuts[i + 1].subtract(cuts[i])
        assert abs(sector.measure() - total / n) < 1e-9
        sectors.append(sector)
    return sectors
