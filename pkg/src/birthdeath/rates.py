"""Birth and death rate models driving the jump chain.

A rate model assigns each configuration a birth intensity over
locations and a death rate per occupied point.  The jump chain picks
its next move by normalizing those masses, so a model must expose the
exact total birth mass, a sampler for the normalized birth density,
and per-point death rates.  Models also declare the constants behind
the four standing assumptions checked by :func:`validate_conditions`:

1. the total birth mass grows at most linearly in the population,
2. death rates stay bounded on bounded populations,
3. death rates stay above a positive floor,
4. the birth rate strictly exceeds a positive floor anywhere within
   the interaction radius of an occupied point, and on a fixed
   immigration ball when the configuration is empty.

Validation probes these on sampled states, so a passing report is
evidence of conformance, not a proof.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .configurations import (
    EMPTY,
    Configuration,
    Point,
    as_point,
    euclidean,
    unit_ball_volume,
)
from .measure import BallRegion, BoxRegion, sample_in_ball

__all__ = [
    "DegenerateStateError",
    "RateModel",
    "ContactModel",
    "total_rate",
    "ConditionCheck",
    "ConditionReport",
    "validate_conditions",
]


class DegenerateStateError(RuntimeError):
    """Raised when a state has zero total jump rate and the chain cannot move."""


class RateModel(abc.ABC):
    """Interface for birth and death rates over finite configurations.

    Concrete models fix the ambient ``dimension``, the ``interaction_radius``
    within which occupied points boost the birth rate, the ``immigration_region``
    (a ball) where births stay available even from the empty state, and the
    declared condition constants ``birth_mass_slope``/``birth_mass_offset``
    (linear growth bound on the total birth mass) and ``birth_floor``
    (strict lower bound on birth rates near occupied points and on the
    immigration ball at the empty state).
    """

    dimension: int
    interaction_radius: float
    immigration_region: BallRegion
    birth_floor: float
    birth_mass_slope: float
    birth_mass_offset: float

    @abc.abstractmethod
    def birth_rate(self, location: Sequence[float], state: Configuration) -> float:
        """Birth intensity at ``location`` given the current ``state``."""

    @abc.abstractmethod
    def death_rate(self, point: Sequence[float], state: Configuration) -> float:
        """Death rate of the occupied ``point`` in ``state``."""

    @abc.abstractmethod
    def total_birth_mass(self, state: Configuration) -> float:
        """Integral of the birth rate over all locations, exactly."""

    @abc.abstractmethod
    def sample_birth_location(self, state: Configuration, rng: np.random.Generator) -> Point:
        """Draw a location from the normalized birth density of ``state``."""

    @abc.abstractmethod
    def death_rate_inf(self) -> float:
        """Declared positive lower bound on death rates (condition 3)."""

    @abc.abstractmethod
    def death_rate_sup(self, max_size: int) -> float:
        """Declared upper bound on death rates over states of size <= max_size."""

    def death_rates(self, state: Configuration) -> list[float]:
        """Per-point death rates in the canonical point order."""
        return [self.death_rate(p, state) for p in state]

    def total_death_mass(self, state: Configuration) -> float:
        return sum(self.death_rates(state))

    def jump_rate(self, state: Configuration) -> float:
        """Total jump mass, births plus deaths, of ``state``."""
        return self.total_birth_mass(state) + self.total_death_mass(state)

    def jump_rate_sup(self, max_size: int) -> float:
        """Upper bound on the jump rate over states of size <= max_size.

        Uses the declared linear birth bound plus the declared death cap;
        both grow with the population, so the bound is tight at max_size.
        """
        m = int(max_size)
        if m < 0:
            raise ValueError("max_size must be nonnegative")
        return (
            self.birth_mass_slope * m
            + self.birth_mass_offset
            + m * self.death_rate_sup(m)
        )

    def birth_mass_in_region(
        self,
        state: Configuration,
        region: BoxRegion | BallRegion | None,
        samples: int = 20_000,
        seed: int | np.random.SeedSequence | None = None,
    ) -> tuple[float, float]:
        """Integral of the birth rate over ``region`` with a standard error.

        ``None`` means the whole space and is exact.  Subclasses may
        resolve specific geometries in closed form via
        :meth:`_exact_birth_mass_in_region`; anything else falls back to
        Monte Carlo over the region.
        """
        if region is None:
            return self.total_birth_mass(state), 0.0
        exact = self._exact_birth_mass_in_region(state, region)
        if exact is not None:
            return exact, 0.0
        rng = np.random.default_rng(seed)
        volume = region.volume
        total = 0.0
        total_sq = 0.0
        for _ in range(samples):
            value = self.birth_rate(region.sample(rng), state)
            total += value
            total_sq += value * value
        mean = total / samples
        variance = max(0.0, total_sq / samples - mean * mean)
        return volume * mean, volume * math.sqrt(variance / samples)

    def _exact_birth_mass_in_region(
        self, state: Configuration, region: BoxRegion | BallRegion
    ) -> float | None:
        return None

    @abc.abstractmethod
    def describe(self) -> str:
        """Stable one-line fingerprint of the model and its parameters."""


def total_rate(model: RateModel, state: Configuration) -> float:
    """Total jump mass of ``state``; raises if the chain cannot move."""
    value = model.jump_rate(state)
    if not value > 0.0:
        raise DegenerateStateError(
            f"state of size {len(state)} has zero total jump rate under {model.describe()}"
        )
    return value


def _ball_region_relation(component: BallRegion, region: BoxRegion | BallRegion) -> str:
    """Classify a rate-component ball against an integration region.

    Returns "inside" when the ball is contained in the region,
    "disjoint" when they cannot intersect, and "partial" otherwise.
    The tests are conservative on the boundary, which only matters on
    null sets of locations.
    """
    c = component.center
    if isinstance(region, BallRegion):
        gap = euclidean(c, region.center)
        if gap + component.radius <= region.radius:
            return "inside"
        if gap > component.radius + region.radius:
            return "disjoint"
        return "partial"
    nearest_sq = 0.0
    inside = True
    for lo, up, x in zip(region.lower, region.upper, c):
        if x < lo:
            nearest_sq += (lo - x) ** 2
            inside = False
        elif x > up:
            nearest_sq += (x - up) ** 2
            inside = False
        else:
            inside = inside and (lo + component.radius <= x <= up - component.radius)
    if not inside and math.sqrt(nearest_sq) > component.radius:
        return "disjoint"
    if inside:
        return "inside"
    return "partial"


def _interval_overlap(lo_a: float, up_a: float, lo_b: float, up_b: float) -> float:
    return max(0.0, min(up_a, up_b) - max(lo_a, lo_b))


class ContactModel(RateModel):
    """Nearest-neighbor contact rates with constant immigration.

    Births arrive with intensity ``immigration_intensity`` anywhere in
    the immigration ball, plus ``neighbor_intensity`` for every occupied
    point within ``interaction_radius`` of the location.  Each occupied
    point dies at ``baseline_death`` plus ``crowding_death`` per
    neighbor within the same radius.  All masses have closed forms, so
    simulation and the probability bounds stay exact.
    """

    def __init__(
        self,
        dimension: int = 1,
        interaction_radius: float = 1.0,
        immigration_intensity: float = 0.8,
        neighbor_intensity: float = 0.1,
        baseline_death: float = 1.0,
        crowding_death: float = 0.0,
        immigration_center: Sequence[float] | None = None,
        immigration_radius: float = 0.5,
        birth_floor: float | None = None,
    ) -> None:
        self.dimension = int(dimension)
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        self.interaction_radius = float(interaction_radius)
        if not self.interaction_radius > 0:
            raise ValueError("interaction_radius must be positive")
        self.immigration_intensity = float(immigration_intensity)
        self.neighbor_intensity = float(neighbor_intensity)
        if not self.immigration_intensity > 0:
            raise ValueError("immigration_intensity must be positive")
        if not self.neighbor_intensity > 0:
            raise ValueError("neighbor_intensity must be positive")
        self.baseline_death = float(baseline_death)
        self.crowding_death = float(crowding_death)
        if self.baseline_death < 0 or self.crowding_death < 0:
            raise ValueError("death parameters must be nonnegative")
        if immigration_center is None:
            immigration_center = (0.0,) * self.dimension
        center = as_point(immigration_center)
        if len(center) != self.dimension:
            raise ValueError("immigration_center dimension mismatch")
        self.immigration_region = BallRegion(center, float(immigration_radius))
        if birth_floor is None:
            birth_floor = 0.5 * min(self.immigration_intensity, self.neighbor_intensity)
        self.birth_floor = float(birth_floor)
        if not 0 < self.birth_floor < min(self.immigration_intensity, self.neighbor_intensity):
            raise ValueError(
                "birth_floor must sit strictly between zero and the smaller intensity"
            )
        ball = unit_ball_volume(self.dimension)
        self._immigration_mass = (
            self.immigration_intensity * ball * self.immigration_region.radius ** self.dimension
        )
        self._per_neighbor_mass = (
            self.neighbor_intensity * ball * self.interaction_radius ** self.dimension
        )
        self.birth_mass_slope = self._per_neighbor_mass
        self.birth_mass_offset = self._immigration_mass

    def birth_rate(self, location: Sequence[float], state: Configuration) -> float:
        rate = 0.0
        if self.immigration_region.contains(location):
            rate += self.immigration_intensity
        radius = self.interaction_radius
        near = sum(1 for p in state if euclidean(location, p) <= radius)
        return rate + self.neighbor_intensity * near

    def death_rate(self, point: Sequence[float], state: Configuration) -> float:
        if self.crowding_death == 0.0:
            return self.baseline_death
        pt = tuple(point)
        radius = self.interaction_radius
        near = sum(1 for p in state if p != pt and euclidean(pt, p) <= radius)
        return self.baseline_death + self.crowding_death * near

    def death_rates(self, state: Configuration) -> list[float]:
        n = len(state)
        if self.crowding_death == 0.0 or n <= 1:
            return [self.baseline_death] * n
        pts = state.points
        radius = self.interaction_radius
        near = [0] * n
        for i in range(n):
            for j in range(i + 1, n):
                if euclidean(pts[i], pts[j]) <= radius:
                    near[i] += 1
                    near[j] += 1
        return [self.baseline_death + self.crowding_death * c for c in near]

    def total_birth_mass(self, state: Configuration) -> float:
        return self._immigration_mass + self._per_neighbor_mass * len(state)

    def sample_birth_location(self, state: Configuration, rng: np.random.Generator) -> Point:
        mass = self.total_birth_mass(state)
        u = rng.random() * mass
        if u < self._immigration_mass or not len(state):
            return sample_in_ball(
                self.immigration_region.center, self.immigration_region.radius, rng
            )
        index = int((u - self._immigration_mass) / self._per_neighbor_mass)
        if index >= len(state):
            index = len(state) - 1
        return sample_in_ball(state.points[index], self.interaction_radius, rng)

    def death_rate_inf(self) -> float:
        return self.baseline_death

    def death_rate_sup(self, max_size: int) -> float:
        return self.baseline_death + self.crowding_death * max(0, int(max_size) - 1)

    def _exact_birth_mass_in_region(
        self, state: Configuration, region: BoxRegion | BallRegion
    ) -> float | None:
        components = [(self.immigration_intensity, self.immigration_region)] + [
            (self.neighbor_intensity, BallRegion(p, self.interaction_radius)) for p in state
        ]
        total = 0.0
        for intensity, ball in components:
            relation = _ball_region_relation(ball, region)
            if relation == "inside":
                total += intensity * ball.volume
            elif relation == "partial":
                if self.dimension != 1:
                    return None
                if isinstance(region, BallRegion):
                    lo, up = region.center[0] - region.radius, region.center[0] + region.radius
                else:
                    lo, up = region.lower[0], region.upper[0]
                overlap = _interval_overlap(
                    ball.center[0] - ball.radius, ball.center[0] + ball.radius, lo, up
                )
                total += intensity * overlap
        return total

    def describe(self) -> str:
        return (
            "contact(d={d}, r={r!r}, imm={imm!r}, nb={nb!r}, death={dd!r}, "
            "crowd={cr!r}, center={c!r}, imm_r={ir!r}, floor={fl!r})"
        ).format(
            d=self.dimension,
            r=self.interaction_radius,
            imm=self.immigration_intensity,
            nb=self.neighbor_intensity,
            dd=self.baseline_death,
            cr=self.crowding_death,
            c=self.immigration_region.center,
            ir=self.immigration_region.radius,
            fl=self.birth_floor,
        )


@dataclass(frozen=True)
class ConditionCheck:
    """Outcome of probing one standing assumption."""

    index: int
    name: str
    passed: bool
    witness: float
    detail: str


@dataclass(frozen=True)
class ConditionReport:
    """Evidence-based conformance report over sampled states.

    A passing report says every probe landed on the right side of the
    declared constants; it is sampled evidence, not a proof.
    """

    model: str
    max_size: int
    states_checked: int
    checks: tuple[ConditionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        lines = [f"condition report for {self.model}"]
        lines.append(f"  states checked: {self.states_checked} (size <= {self.max_size})")
        for c in self.checks:
            verdict = "PASS" if c.passed else "FAIL"
            lines.append(f"  [{verdict}] {c.index}. {c.name}: {c.detail}")
        return "\n".join(lines)

    def to_csv_rows(self) -> list[dict[str, object]]:
        return [
            {
                "condition": c.index,
                "name": c.name,
                "verdict": "PASS" if c.passed else "FAIL",
                "witness": repr(c.witness),
                "detail": c.detail,
            }
            for c in self.checks
        ]


def validate_conditions(
    model: RateModel,
    max_size: int,
    trial_states: Sequence[Configuration],
    probe_points: int = 16,
    seed: int | np.random.SeedSequence | None = None,
) -> ConditionReport:
    """Probe the four standing assumptions on sampled states.

    Checks, over every trial state of size at most ``max_size``: the
    linear bound on the total birth mass, finiteness and boundedness of
    death rates, the positive death-rate floor, and strict positivity
    of birth rates above the declared floor near occupied points (and
    on the immigration ball at the empty state).  Any trial state
    larger than ``max_size`` is rejected up front.
    """
    max_size = int(max_size)
    for state in trial_states:
        if len(state) > max_size:
            raise ValueError("trial state exceeds max_size")
    rng = np.random.default_rng(seed)
    radius = model.interaction_radius

    # 1. sublinear total birth mass
    worst_margin = math.inf
    worst_size = 0
    for state in trial_states:
        bound = model.birth_mass_slope * len(state) + model.birth_mass_offset
        margin = bound - model.total_birth_mass(state)
        if margin < worst_margin:
            worst_margin = margin
            worst_size = len(state)
    tolerance = 1e-9 * max(1.0, abs(model.birth_mass_offset))
    growth_ok = worst_margin >= -tolerance
    checks = [
        ConditionCheck(
            1,
            "linear bound on total birth mass",
            growth_ok,
            worst_margin,
            f"worst margin {worst_margin:.6g} at size {worst_size}",
        )
    ]

    # 2. bounded death rates on bounded populations
    max_rate = 0.0
    finite = True
    declared_sup = model.death_rate_sup(max_size)
    for state in trial_states:
        for value in model.death_rates(state):
            finite = finite and math.isfinite(value)
            max_rate = max(max_rate, value)
    sup_ok = finite and max_rate <= declared_sup * (1 + 1e-12) + 1e-12
    checks.append(
        ConditionCheck(
            2,
            "bounded death rates",
            sup_ok,
            max_rate,
            f"max observed {max_rate:.6g}, declared cap {declared_sup:.6g}",
        )
    )

    # 3. positive death-rate floor
    min_rate = math.inf
    declared_inf = model.death_rate_inf()
    for state in trial_states:
        for value in model.death_rates(state):
            min_rate = min(min_rate, value)
    observed = min_rate if min_rate < math.inf else declared_inf
    floor_ok = declared_inf > 0 and observed > 0 and observed >= declared_inf * (1 - 1e-12)
    checks.append(
        ConditionCheck(
            3,
            "positive death-rate floor",
            floor_ok,
            observed,
            f"min observed {observed:.6g}, declared floor {declared_inf:.6g}",
        )
    )

    # 4. birth rates strictly above the floor near occupied points,
    #    and on the immigration ball at the empty state
    floor = model.birth_floor
    min_birth = math.inf
    birth_ok = floor > 0
    for state in trial_states:
        if not len(state):
            continue
        pts = state.points
        for _ in range(probe_points):
            anchor = pts[int(rng.random() * len(pts))]
            location = sample_in_ball(anchor, radius, rng)
            value = model.birth_rate(location, state)
            min_birth = min(min_birth, value)
            birth_ok = birth_ok and value > floor
    immigration = model.immigration_region
    for _ in range(probe_points):
        location = sample_in_ball(immigration.center, immigration.radius, rng)
        value = model.birth_rate(location, EMPTY)
        min_birth = min(min_birth, value)
        birth_ok = birth_ok and value > floor
    witness = min_birth if min_birth < math.inf else 0.0
    checks.append(
        ConditionCheck(
            4,
            "birth rates above the floor near mass",
            birth_ok,
            witness,
            f"min probed {witness:.6g}, floor {floor:.6g}",
        )
    )

    return ConditionReport(
        model=model.describe(),
        max_size=max_size,
        states_checked=len(trial_states),
        checks=tuple(checks),
    )
