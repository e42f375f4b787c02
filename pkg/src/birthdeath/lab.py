"""Reachability and null-set experiments for the jump chain.

Two empirical directions back the chain's communication structure
relative to the layered reference measure.  The positive direction
runs hitting experiments: from a spread of starting states, every
target of positive measure must be reached with a Wilson lower
confidence bound above zero.  The negative direction checks that
curated zero-measure predicate sets are never visited in large runs,
and that, analytically, a single step from almost any sampled state
has zero probability of landing in them.  A pipeline ties the
constructive path machinery to an observed hitting frequency so the
certified corridor bound can be compared against reality.

Every report row is reproducible from the model fingerprint, the
master seed, and the row's case index; replica streams are spawned per
case and per replica, so results are independent of worker count.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .chain import (
    BallTarget,
    EmptyTarget,
    ExactPointTarget,
    HyperplaneTarget,
    NullTarget,
    PairDistanceTarget,
    TargetPiece,
    TargetSet,
    Trajectory,
    _advance,
    hitting_estimate,
    simulate,
    wilson_interval,
)
from .configurations import EMPTY, Configuration, RhoBall, in_ball
from .measure import BoxRegion, lp_measure_estimate, sample_poisson_config
from .paths import build_path, corridor_prob_lower_bound
from .rates import RateModel

__all__ = [
    "CaseRow",
    "ExperimentReport",
    "ExperimentSetupError",
    "SuiteSizes",
    "positive_measure_experiment",
    "null_set_experiment",
    "one_step_null_preservation",
    "theorem_pipeline",
    "run_default_suite",
    "describe_configuration",
]

_CSV_COLUMNS = [
    "experiment",
    "case",
    "start",
    "target",
    "max_steps",
    "replicas",
    "hits",
    "estimate",
    "ci_low",
    "ci_high",
    "target_measure",
    "certified_bound",
    "verdict",
    "case_seed",
]


class ExperimentSetupError(ValueError):
    """Raised when an experiment is configured outside its domain."""


def describe_configuration(state: Configuration) -> str:
    """Compact deterministic label for a starting state."""
    if len(state) == 0:
        return "empty"
    coords = ";".join(",".join(repr(c) for c in p) for p in state.points)
    return f"n={len(state)}[{coords}]"


@dataclass(frozen=True)
class CaseRow:
    """One (start, target) cell of an experiment."""

    experiment: str
    case: int
    start: str
    target: str
    max_steps: int
    replicas: int
    hits: int
    estimate: float
    ci_low: float
    ci_high: float
    verdict: str
    case_seed: str
    target_measure: float | None = None
    certified_bound: float | None = None

    def as_csv_dict(self) -> dict[str, str]:
        def fmt(value: object) -> str:
            if value is None:
                return ""
            if isinstance(value, float):
                return repr(value)
            return str(value)

        return {column: fmt(getattr(self, column)) for column in _CSV_COLUMNS}


@dataclass(frozen=True)
class ExperimentReport:
    """Outcome of one experiment: per-case rows plus an overall verdict."""

    experiment: str
    model: str
    master_seed: str
    rows: tuple[CaseRow, ...]
    failures: tuple[Trajectory, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(row.verdict == "PASS" for row in self.rows)

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        lines = [f"[{verdict}] {self.experiment} ({len(self.rows)} cases, seed {self.master_seed})"]
        for row in self.rows:
            lines.append(
                f"  [{row.verdict}] case {row.case}: start={row.start} target={row.target} "
                f"hits={row.hits}/{row.replicas} est={row.estimate:.6g} "
                f"ci=[{row.ci_low:.6g}, {row.ci_high:.6g}]"
                + (
                    f" bound={row.certified_bound:.6g}"
                    if row.certified_bound is not None
                    else ""
                )
            )
        return "\n".join(lines)

    def write_csv(self, path: str) -> None:
        """Write the rows as CSV; identical reports give identical bytes."""
        with open(path, "w", newline="") as handle:
            writer = csv.DictWriter(handle, fieldnames=_CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row.as_csv_dict())


def _case_seed(master_seed: int, case: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(case,))


def _certify_positive(
    piece: TargetPiece,
    samples: int,
    seed: np.random.SeedSequence,
    workers: int,
) -> float:
    """Reference measure of a target piece, estimated for balls.

    The empty singleton carries exact unit mass.  For a ball target the
    measure is estimated over the bounding window of the center
    inflated by the radius; a zero estimate rejects the target.
    """
    if isinstance(piece, EmptyTarget):
        return 1.0
    if not isinstance(piece, BallTarget):
        raise ExperimentSetupError(
            f"positive-measure targets must be balls or the empty singleton, got {piece.label()}"
        )
    ball = piece.ball
    center = ball.center
    pad = ball.radius
    lower = tuple(min(p[k] for p in center) - pad for k in range(center.dimension))
    upper = tuple(max(p[k] for p in center) + pad for k in range(center.dimension))
    window = BoxRegion(lower, upper)
    estimate = lp_measure_estimate(
        layer=ball.layer,
        window=window,
        predicate=lambda cfg: in_ball(cfg, ball),
        samples=samples,
        seed=seed,
        workers=workers,
    )
    if not estimate.value > 0.0:
        raise ExperimentSetupError(
            f"target {piece.label()} shows no mass in {samples} draws; "
            "refusing to test an apparently null target"
        )
    return estimate.value


def positive_measure_experiment(
    model: RateModel,
    targets: Sequence[TargetPiece],
    starts: Sequence[Configuration],
    max_steps: int,
    replicas: int,
    seed: int,
    workers: int = 1,
    measure_samples: int = 10_000,
) -> ExperimentReport:
    """Hitting experiment over every (start, target) pair.

    Each target is first certified to carry positive reference measure
    (exact for the empty singleton, Monte Carlo for balls).  A case
    passes when its Wilson 95% lower confidence bound on the hitting
    probability within ``max_steps`` steps is strictly positive.
    Starts sitting inside their target still need a first return.
    """
    if not targets or not starts:
        raise ExperimentSetupError("need at least one target and one start")
    rows: list[CaseRow] = []
    case = 0
    measures: list[float] = []
    for index, piece in enumerate(targets):
        cert_seed = np.random.SeedSequence(seed, spawn_key=(10_000 + index,))
        measures.append(_certify_positive(piece, measure_samples, cert_seed, workers))
    for target_index, piece in enumerate(targets):
        target = TargetSet((piece,))
        for start in starts:
            case_seed = _case_seed(seed, case)
            estimate = hitting_estimate(
                start, target, model, max_steps, replicas, case_seed, workers
            )
            verdict = "PASS" if estimate.ci_low > 0.0 else "FAIL"
            rows.append(
                CaseRow(
                    experiment="positive_measure",
                    case=case,
                    start=describe_configuration(start),
                    target=piece.label(),
                    max_steps=max_steps,
                    replicas=replicas,
                    hits=estimate.hits,
                    estimate=estimate.estimate,
                    ci_low=estimate.ci_low,
                    ci_high=estimate.ci_high,
                    verdict=verdict,
                    case_seed=f"{seed}:{case}",
                    target_measure=measures[target_index],
                )
            )
            case += 1
    return ExperimentReport(
        experiment="positive_measure",
        model=model.describe(),
        master_seed=str(seed),
        rows=tuple(rows),
    )


def null_set_experiment(
    model: RateModel,
    null_targets: Sequence[NullTarget],
    starts: Sequence[Configuration],
    max_steps: int,
    replicas: int,
    seed: int,
) -> ExperimentReport:
    """Count visits to curated null predicate sets; zero is a pass.

    Every start runs ``replicas`` trajectories of ``max_steps`` steps,
    and each visited state is checked against every predicate, so each
    predicate is audited on the full trajectory budget.  Any hit fails
    the row and the offending trajectory is replayed from its replica
    seed and attached to the report.
    """
    for piece in null_targets:
        if not isinstance(piece, NullTarget):
            raise ExperimentSetupError(
                f"null-set experiments take curated null predicates, got {piece!r}"
            )
    if not null_targets or not starts:
        raise ExperimentSetupError("need at least one null target and one start")
    hit_counts = [[0] * len(null_targets) for _ in starts]
    failures: list[Trajectory] = []
    for start_index, start in enumerate(starts):
        case_seed = _case_seed(seed, start_index)
        children = case_seed.spawn(replicas)
        for replica, child in enumerate(children):
            rng = np.random.default_rng(child)
            state = start
            seen = [False] * len(null_targets)
            for _ in range(max_steps):
                state, _, _ = _advance(state, model, rng)
                for t_index, piece in enumerate(null_targets):
                    if not seen[t_index] and piece.contains(state):
                        seen[t_index] = True
                        hit_counts[start_index][t_index] += 1
                        failures.append(
                            simulate(
                                start,
                                model,
                                TargetSet((piece,)),
                                max_steps,
                                np.random.SeedSequence(
                                    seed, spawn_key=(start_index, replica)
                                ),
                            )
                        )
    rows: list[CaseRow] = []
    case = 0
    for start_index, start in enumerate(starts):
        for t_index, piece in enumerate(null_targets):
            hits = hit_counts[start_index][t_index]
            low, high = wilson_interval(hits, replicas)
            rows.append(
                CaseRow(
                    experiment="null_set",
                    case=case,
                    start=describe_configuration(start),
                    target=piece.label(),
                    max_steps=max_steps,
                    replicas=replicas,
                    hits=hits,
                    estimate=hits / replicas,
                    ci_low=low,
                    ci_high=high,
                    verdict="PASS" if hits == 0 else "FAIL",
                    case_seed=f"{seed}:{start_index}",
                    target_measure=0.0,
                )
            )
            case += 1
    return ExperimentReport(
        experiment="null_set",
        model=model.describe(),
        master_seed=str(seed),
        rows=tuple(rows),
        failures=tuple(failures),
    )


def one_step_null_preservation(
    model: RateModel,
    null_target: NullTarget,
    states: Sequence[Configuration],
    seed: int | None = None,
) -> ExperimentReport:
    """Analytic one-step check that a null set stays unreachable.

    For each sampled state the detector decides exactly whether one
    chain step reaches the predicate set with positive probability:
    births only enter from states already inside (the completing
    locations form a Lebesgue null set, and the predicates are monotone
    under added points), deaths enter exactly when removing some point
    lands inside.  A pass means zero flagged states, the sampled
    counterpart of the set being preserved as null by one step of the
    chain.
    """
    if not isinstance(null_target, NullTarget):
        raise ExperimentSetupError(
            "one_step_null_preservation takes a curated null predicate; "
            "positive-measure targets are outside its domain"
        )
    if not states:
        raise ExperimentSetupError("need at least one sampled state")
    flagged = sum(1 for state in states if null_target.one_step_positive(state))
    total = len(states)
    low, high = wilson_interval(flagged, total)
    row = CaseRow(
        experiment="one_step_null_preservation",
        case=0,
        start=f"{total} sampled states",
        target=null_target.label(),
        max_steps=1,
        replicas=total,
        hits=flagged,
        estimate=flagged / total,
        ci_low=low,
        ci_high=high,
        verdict="PASS" if flagged == 0 else "FAIL",
        case_seed="" if seed is None else str(seed),
        target_measure=0.0,
    )
    return ExperimentReport(
        experiment="one_step_null_preservation",
        model=model.describe(),
        master_seed="" if seed is None else str(seed),
        rows=(row,),
    )


def theorem_pipeline(
    model: RateModel,
    goal: Configuration,
    ball_radius: float | None = None,
    extra_steps: int | None = None,
    replicas: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> ExperimentReport:
    """End-to-end reachability check for one goal configuration.

    Builds the constructive path from empty to ``goal``, certifies a
    corridor lower bound on following it, then measures the hitting
    frequency of the bottleneck ball around ``goal`` from the empty
    state.  The run passes when the observed Wilson interval is
    consistent with the bound: upper limit at or above it and lower
    limit above zero.  The certified bound uses a ball radius strictly
    below a quarter of the interaction radius; when the requested
    target ball is wider, the bound is computed for an inscribed ball,
    which only makes it more conservative.
    """
    if len(goal) == 0:
        raise ExperimentSetupError("the pipeline needs a nonempty goal configuration")
    radius = model.interaction_radius
    target_radius = radius / 4.0 if ball_radius is None else float(ball_radius)
    if not target_radius > 0:
        raise ExperimentSetupError("ball_radius must be positive")
    certified_radius = target_radius if target_radius < radius / 4.0 else radius / 8.0
    path = build_path(goal, radius, model.immigration_region.center)
    bound = corridor_prob_lower_bound(path, certified_radius, model)
    span = path.length + 2 * len(goal)
    max_steps = span + (50 * span if extra_steps is None else int(extra_steps))
    target_piece = BallTarget(RhoBall(goal, target_radius))
    case_seed = _case_seed(seed, 0)
    estimate = hitting_estimate(
        EMPTY, TargetSet((target_piece,)), model, max_steps, replicas, case_seed, workers
    )
    passed = estimate.ci_high >= bound and estimate.ci_low > 0.0
    row = CaseRow(
        experiment="theorem_pipeline",
        case=0,
        start="empty",
        target=target_piece.label(),
        max_steps=max_steps,
        replicas=replicas,
        hits=estimate.hits,
        estimate=estimate.estimate,
        ci_low=estimate.ci_low,
        ci_high=estimate.ci_high,
        verdict="PASS" if passed else "FAIL",
        case_seed=f"{seed}:0",
        certified_bound=bound,
    )
    return ExperimentReport(
        experiment="theorem_pipeline",
        model=model.describe(),
        master_seed=str(seed),
        rows=(row,),
    )


@dataclass(frozen=True)
class SuiteSizes:
    """Replica and step budgets for the default experiment suite."""

    max_steps: int = 400
    replicas: int = 1_500
    null_max_steps: int = 50
    null_replicas: int = 5_000
    preservation_draws: int = 2_000
    pipeline_replicas: int = 4_000
    pipeline_extra_steps: int | None = None
    extinction_replicas: int = 400
    extinction_max_steps: int = 4_000
    measure_samples: int = 10_000
    poisson_intensity: float = 1.0


def default_starts(
    model: RateModel, seed: int, count: int = 3, intensity: float = 1.0
) -> list[Configuration]:
    """The default spread of starting states: empty, the anchor singleton,
    and ``count`` Poisson draws from a window around the immigration ball."""
    center = model.immigration_region.center
    reach = model.immigration_region.radius + model.interaction_radius
    window = BoxRegion(
        tuple(c - reach for c in center), tuple(c + reach for c in center)
    )
    starts = [EMPTY, Configuration([center])]
    for index in range(count):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(20_000 + index,)))
        starts.append(sample_poisson_config(intensity, window, rng))
    return starts


def default_ball_targets(model: RateModel) -> list[TargetPiece]:
    """The default positive-measure targets: the empty singleton plus
    three bottleneck balls of a quarter interaction radius."""
    center = model.immigration_region.center
    radius = model.interaction_radius
    quarter = radius / 4.0
    shift = tuple(
        c + (radius / 3.0 if k == 0 else 0.0) for k, c in enumerate(center)
    )
    left = tuple(c - (radius / 6.0 if k == 0 else 0.0) for k, c in enumerate(center))
    right = tuple(c + (radius / 6.0 if k == 0 else 0.0) for k, c in enumerate(center))
    return [
        EmptyTarget(),
        BallTarget(RhoBall(Configuration([center]), quarter)),
        BallTarget(RhoBall(Configuration([shift]), quarter)),
        BallTarget(RhoBall(Configuration([left, right]), quarter)),
    ]


def default_extinction_start(model: RateModel) -> Configuration:
    """Five occupied points strung along the first axis near the anchor."""
    center = model.immigration_region.center
    gap = model.interaction_radius / 3.0
    return Configuration(
        [
            tuple(c + (k * gap if axis == 0 else 0.0) for axis, c in enumerate(center))
            for k in range(-2, 3)
        ]
    )


def run_default_suite(
    model: RateModel,
    seed: int,
    sizes: SuiteSizes = SuiteSizes(),
    workers: int = 1,
) -> list[ExperimentReport]:
    """Run the whole default experiment suite and return its reports.

    Covers the positive direction (hitting every default target from
    every default start, plus extinction from a five-point state), the
    negative direction (null-set trajectories and the analytic one-step
    detector on Poisson draws), and the path pipeline for a two-point
    goal.  Deterministic for a fixed (model, seed, sizes) triple.
    """
    center = model.immigration_region.center
    starts = default_starts(model, seed, intensity=sizes.poisson_intensity)
    reports = [
        positive_measure_experiment(
            model,
            default_ball_targets(model),
            starts,
            max_steps=sizes.max_steps,
            replicas=sizes.replicas,
            seed=seed,
            workers=workers,
            measure_samples=sizes.measure_samples,
        )
    ]

    null_targets = [
        ExactPointTarget(tuple(c + (1.0 if k == 0 else 0.0) for k, c in enumerate(center))),
        HyperplaneTarget(0, center[0] + 0.25),
        PairDistanceTarget(1.0),
    ]
    null_starts = [EMPTY, starts[2]]
    reports.append(
        null_set_experiment(
            model,
            null_targets,
            null_starts,
            max_steps=sizes.null_max_steps,
            replicas=sizes.null_replicas,
            seed=seed + 1,
        )
    )

    reach = model.immigration_region.radius + model.interaction_radius
    window = BoxRegion(tuple(c - reach for c in center), tuple(c + reach for c in center))
    draw_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(30_000,)))
    preservation_states = [
        sample_poisson_config(sizes.poisson_intensity, window, draw_rng)
        for _ in range(sizes.preservation_draws)
    ]
    reports.append(
        one_step_null_preservation(model, null_targets[0], preservation_states, seed=seed)
    )

    gap = model.interaction_radius / 6.0
    goal = Configuration(
        [
            tuple(c - (gap if k == 0 else 0.0) for k, c in enumerate(center)),
            tuple(c + (gap if k == 0 else 0.0) for k, c in enumerate(center)),
        ]
    )
    reports.append(
        theorem_pipeline(
            model,
            goal,
            replicas=sizes.pipeline_replicas,
            extra_steps=sizes.pipeline_extra_steps,
            seed=seed + 2,
            workers=workers,
        )
    )

    extinction = positive_measure_experiment(
        model,
        [EmptyTarget()],
        [default_extinction_start(model)],
        max_steps=sizes.extinction_max_steps,
        replicas=sizes.extinction_replicas,
        seed=seed + 3,
        workers=workers,
        measure_samples=sizes.measure_samples,
    )
    extinction = ExperimentReport(
        experiment="extinction",
        model=extinction.model,
        master_seed=extinction.master_seed,
        rows=tuple(replace(row, experiment="extinction") for row in extinction.rows),
        failures=extinction.failures,
    )
    reports.append(extinction)
    return reports
