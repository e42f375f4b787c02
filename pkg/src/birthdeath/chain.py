"""The jump chain over finite configurations.

One step from a state removes an occupied point or inserts a newborn
one.  A specific death is chosen with probability proportional to its
death rate, and a birth lands in a region with probability
proportional to the birth mass there; everything is normalized by the
state's total jump mass.  The chain is simulated step by step, records
births and deaths as events (states are reconstructed on demand), and
hitting probabilities of target sets are estimated over independent
replicas with a Wilson score interval.  Hitting always means first
return: the starting state itself does not count, even when it already
sits inside the target.
"""

from __future__ import annotations

import abc
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .configurations import (
    Configuration,
    Point,
    RhoBall,
    euclidean,
    in_ball,
)
from .measure import BallRegion, BoxRegion
from .rates import DegenerateStateError, RateModel

__all__ = [
    "ChainEvent",
    "Trajectory",
    "TargetPiece",
    "EmptyTarget",
    "BallTarget",
    "PredicateTarget",
    "NullTarget",
    "ExactPointTarget",
    "HyperplaneTarget",
    "PairDistanceTarget",
    "TargetSet",
    "HittingEstimate",
    "RegionProbability",
    "step",
    "simulate",
    "replay",
    "death_probability",
    "birth_probability_region",
    "hitting_estimate",
    "wilson_interval",
]


@dataclass(frozen=True, slots=True)
class ChainEvent:
    """A single move: ``kind`` is "birth" or "death" of ``point`` at step ``step_index``."""

    kind: str
    point: Point
    step_index: int


@dataclass(frozen=True)
class Trajectory:
    """A simulated run stored as its initial state plus the event list.

    ``terminal_reason`` is "hit_target" or "max_steps"; ``hit_step`` is
    the first-return step index when the target was reached.  States
    along the run are reconstructed by :func:`replay`.
    """

    initial: Configuration
    events: tuple[ChainEvent, ...]
    seed: object
    terminal_reason: str
    hit_step: int | None = None

    def states(self) -> Iterator[Configuration]:
        """Yield the initial state and every post-event state in order."""
        state = self.initial
        yield state
        for event in self.events:
            if event.kind == "birth":
                state = state.with_point(event.point)
            else:
                state = state.without_point(event.point)
            yield state

    def final_state(self) -> Configuration:
        *_, last = self.states()
        return last

    def __len__(self) -> int:
        return len(self.events)


def replay(trajectory: Trajectory) -> list[Configuration]:
    """All states of the trajectory, from the initial one onward.

    Replays the event list; a death of an absent point or a birth of a
    present one fails loudly, so a successful replay re-checks the
    event-consistency invariant.
    """
    return list(trajectory.states())


# --- target sets ------------------------------------------------------


class TargetPiece(abc.ABC):
    """One membership test a target set is built from."""

    @abc.abstractmethod
    def contains(self, state: Configuration) -> bool: ...

    @abc.abstractmethod
    def label(self) -> str: ...


@dataclass(frozen=True)
class EmptyTarget(TargetPiece):
    """The singleton target holding only the empty configuration."""

    def contains(self, state: Configuration) -> bool:
        return len(state) == 0

    def label(self) -> str:
        return "empty"


@dataclass(frozen=True)
class BallTarget(TargetPiece):
    """A bottleneck-metric ball on its cardinality layer."""

    ball: RhoBall

    def contains(self, state: Configuration) -> bool:
        return in_ball(state, self.ball)

    def label(self) -> str:
        coords = ";".join(repr(list(p)) for p in self.ball.center.points)
        return f"ball(center=[{coords}], radius={self.ball.radius!r})"


@dataclass(frozen=True)
class PredicateTarget(TargetPiece):
    """Arbitrary predicate target, an escape hatch for tests and tooling.

    Not accepted by the null-set experiments, which insist on the
    curated null predicates below.
    """

    predicate: Callable[[Configuration], bool]
    name: str = "predicate"

    def contains(self, state: Configuration) -> bool:
        return bool(self.predicate(state))

    def label(self) -> str:
        return self.name


class NullTarget(TargetPiece):
    """A curated predicate whose set carries zero reference measure.

    Each variant is monotone under adding points: once a state
    satisfies it, every superset does too.  That makes the one-step
    reachability analysis exact: a birth can only enter the set from a
    state already inside it (the completing locations form a Lebesgue
    null set), while a death enters it exactly when removing some point
    lands inside.
    """

    def one_step_positive(self, state: Configuration) -> bool:
        """Whether one chain step from ``state`` hits the set with positive probability."""
        if self.contains(state):
            return True
        return any(self.contains(state.without_index(i)) for i in range(len(state)))


@dataclass(frozen=True)
class ExactPointTarget(NullTarget):
    """States containing one exact point, coordinate for coordinate."""

    point: Point

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", tuple(float(c) for c in self.point))

    def contains(self, state: Configuration) -> bool:
        return self.point in state

    def label(self) -> str:
        return f"null:exact_point{self.point!r}"


@dataclass(frozen=True)
class HyperplaneTarget(NullTarget):
    """States with some point lying exactly on a coordinate hyperplane."""

    axis: int
    value: float

    def contains(self, state: Configuration) -> bool:
        axis, value = self.axis, self.value
        return any(p[axis] == value for p in state)

    def label(self) -> str:
        return f"null:hyperplane(axis={self.axis}, value={self.value!r})"


@dataclass(frozen=True)
class PairDistanceTarget(NullTarget):
    """States with two points at exactly the given distance."""

    distance: float

    def contains(self, state: Configuration) -> bool:
        pts = state.points
        n = len(pts)
        d = self.distance
        for i in range(n):
            for j in range(i + 1, n):
                if euclidean(pts[i], pts[j]) == d:
                    return True
        return False

    def label(self) -> str:
        return f"null:pair_distance({self.distance!r})"


@dataclass(frozen=True)
class TargetSet:
    """A finite union of target pieces."""

    pieces: tuple[TargetPiece, ...]

    def __post_init__(self) -> None:
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("a target set needs at least one piece")
        object.__setattr__(self, "pieces", pieces)

    def membership(self, state: Configuration) -> bool:
        for piece in self.pieces:
            if piece.contains(state):
                return True
        return False

    def label(self) -> str:
        return " | ".join(piece.label() for piece in self.pieces)


# --- the step kernel --------------------------------------------------


def _advance(
    state: Configuration, model: RateModel, rng: np.random.Generator
) -> tuple[Configuration, str, Point]:
    """One kernel move; returns the new state with the move's kind and point."""
    death_rates = model.death_rates(state)
    death_mass = sum(death_rates)
    birth_mass = model.total_birth_mass(state)
    total = death_mass + birth_mass
    if not total > 0.0:
        raise DegenerateStateError(
            f"state of size {len(state)} has zero total jump rate"
        )
    u = rng.random() * total
    if u < death_mass:
        acc = 0.0
        index = len(death_rates) - 1
        for i, rate in enumerate(death_rates):
            acc += rate
            if u < acc:
                index = i
                break
        point = state.points[index]
        return state.without_index(index), "death", point
    location = model.sample_birth_location(state, rng)
    while location in state:
        location = model.sample_birth_location(state, rng)
    return state.with_point(location), "birth", location


def step(
    state: Configuration,
    model: RateModel,
    rng: np.random.Generator | np.random.SeedSequence | int | None,
) -> tuple[Configuration, ChainEvent]:
    """Perform one chain step and return the new state with its event.

    A specific occupied point dies with probability ``death rate /
    total mass``; otherwise a birth location is drawn from the
    normalized birth density.  Raises :class:`DegenerateStateError`
    when the state has zero total jump mass.
    """
    rng = np.random.default_rng(rng)
    new_state, kind, point = _advance(state, model, rng)
    return new_state, ChainEvent(kind, point, 0)


def simulate(
    initial: Configuration,
    model: RateModel,
    target: TargetSet | None,
    max_steps: int,
    seed: int | np.random.SeedSequence | None,
) -> Trajectory:
    """Run the chain from ``initial`` until first return to ``target`` or ``max_steps``.

    The trajectory records the seed and every event, and identical
    ``(initial, model, seed, max_steps)`` inputs reproduce it
    bit for bit.  Membership is checked after each step, so a start
    inside the target still requires a return at step one or later.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be nonnegative")
    rng = np.random.default_rng(seed)
    state = initial
    events: list[ChainEvent] = []
    hit_step: int | None = None
    member = target.membership if target is not None else None
    for index in range(1, max_steps + 1):
        state, kind, point = _advance(state, model, rng)
        events.append(ChainEvent(kind, point, index))
        if member is not None and member(state):
            hit_step = index
            break
    reason = "hit_target" if hit_step is not None else "max_steps"
    return Trajectory(
        initial=initial,
        events=tuple(events),
        seed=seed,
        terminal_reason=reason,
        hit_step=hit_step,
    )


def death_probability(state: Configuration, point: Sequence[float], model: RateModel) -> float:
    """Exact probability that the next move removes ``point``."""
    pt = tuple(float(c) for c in point)
    if pt not in state:
        raise ValueError(f"point {pt!r} is not in the state")
    total = model.jump_rate(state)
    if not total > 0.0:
        raise DegenerateStateError("state has zero total jump rate")
    return model.death_rate(pt, state) / total


@dataclass(frozen=True)
class RegionProbability:
    """A probability with the numerical error of its estimation (0 when exact)."""

    value: float
    std_error: float


def birth_probability_region(
    state: Configuration,
    region: BoxRegion | BallRegion | None,
    model: RateModel,
    samples: int = 20_000,
    seed: int | np.random.SeedSequence | None = None,
) -> RegionProbability:
    """Probability that the next move is a birth landing in ``region``.

    ``None`` means a birth anywhere and is exact.  Geometries the model
    resolves in closed form are exact as well; otherwise the birth mass
    over the region is integrated by Monte Carlo and the estimate
    carries its standard error.
    """
    total = model.jump_rate(state)
    if not total > 0.0:
        raise DegenerateStateError("state has zero total jump rate")
    mass, error = model.birth_mass_in_region(state, region, samples=samples, seed=seed)
    return RegionProbability(mass / total, error / total)


# --- hitting estimates ------------------------------------------------

_Z95 = 1.959963984540054


def wilson_interval(hits: int, total: int, z: float = _Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (95% by default)."""
    if total <= 0:
        raise ValueError("need at least one trial")
    if not 0 <= hits <= total:
        raise ValueError("hits must lie between 0 and total")
    p = hits / total
    z2 = z * z
    denom = 1.0 + z2 / total
    center = (p + z2 / (2.0 * total)) / denom
    half = z * math.sqrt(p * (1.0 - p) / total + z2 / (4.0 * total * total)) / denom
    # The low end is 0 exactly when no hit was seen (and the high end 1
    # when every trial hit); rounding noise must not fake a positive
    # lower bound, since downstream verdicts test ci_low > 0.
    low = 0.0 if hits == 0 else max(0.0, center - half)
    high = 1.0 if hits == total else min(1.0, center + half)
    return low, high


@dataclass(frozen=True)
class HittingEstimate:
    """Replica-based estimate of a first-return hitting probability."""

    hits: int
    replicas: int
    estimate: float
    ci_low: float
    ci_high: float
    max_steps: int

    @classmethod
    def from_counts(cls, hits: int, replicas: int, max_steps: int) -> "HittingEstimate":
        low, high = wilson_interval(hits, replicas)
        return cls(hits, replicas, hits / replicas, low, high, max_steps)


def _hit_within(
    initial: Configuration,
    model: RateModel,
    member: Callable[[Configuration], bool],
    max_steps: int,
    rng: np.random.Generator,
) -> bool:
    state = initial
    for _ in range(max_steps):
        state, _, _ = _advance(state, model, rng)
        if member(state):
            return True
    return False


def _hitting_block(
    initial: Configuration,
    model: RateModel,
    target: TargetSet,
    max_steps: int,
    children: list[np.random.SeedSequence],
) -> int:
    member = target.membership
    hits = 0
    for child in children:
        if _hit_within(initial, model, member, max_steps, np.random.default_rng(child)):
            hits += 1
    return hits


def hitting_estimate(
    initial: Configuration,
    target: TargetSet,
    model: RateModel,
    max_steps: int,
    replicas: int,
    seed: int | np.random.SeedSequence | None,
    workers: int = 1,
) -> HittingEstimate:
    """Estimate the probability of reaching ``target`` within ``max_steps``.

    Runs independent replicas, each on its own stream spawned from the
    seed by replica index, and wraps the hit count in a Wilson 95%
    interval.  Results do not depend on ``workers``; truncation at
    ``max_steps`` makes this a lower-bound proxy for the untruncated
    hitting probability.
    """
    if replicas < 1:
        raise ValueError("need at least one replica")
    if max_steps < 1:
        raise ValueError("need at least one step")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    children = root.spawn(replicas)
    workers = max(1, int(workers))
    if workers == 1:
        hits = _hitting_block(initial, model, target, max_steps, children)
    else:
        chunk = (replicas + workers - 1) // workers
        blocks = [children[k : k + chunk] for k in range(0, replicas, chunk)]
        with ProcessPoolExecutor(max_workers=len(blocks)) as pool:
            futures = [
                pool.submit(_hitting_block, initial, model, target, max_steps, block)
                for block in blocks
            ]
            hits = sum(f.result() for f in futures)
    return HittingEstimate.from_counts(hits, replicas, max_steps)
