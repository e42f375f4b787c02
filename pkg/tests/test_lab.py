"""Experiment-layer tests: reports, verdicts, determinism, rejections."""

import numpy as np
import pytest

from birthdeath import (
    EMPTY,
    BallTarget,
    BoxRegion,
    CaseRow,
    Configuration,
    ContactModel,
    EmptyTarget,
    ExactPointTarget,
    ExperimentSetupError,
    HyperplaneTarget,
    PairDistanceTarget,
    PredicateTarget,
    RhoBall,
    SuiteSizes,
    null_set_experiment,
    one_step_null_preservation,
    positive_measure_experiment,
    run_default_suite,
    sample_poisson_config,
    theorem_pipeline,
)
from birthdeath.lab import describe_configuration

SMALL = SuiteSizes(
    max_steps=120,
    replicas=60,
    null_max_steps=40,
    null_replicas=40,
    preservation_draws=50,
    pipeline_replicas=200,
    extinction_replicas=50,
    extinction_max_steps=300,
    measure_samples=2_000,
)


def poisson_states(model, count, seed):
    center = model.immigration_region.center
    reach = model.immigration_region.radius + model.interaction_radius
    window = BoxRegion(tuple(c - reach for c in center), tuple(c + reach for c in center))
    rng = np.random.default_rng(seed)
    return [sample_poisson_config(1.0, window, rng) for _ in range(count)]


class TestPositiveMeasureExperiment:
    def test_small_run_passes_with_positive_lower_bounds(self):
        m = ContactModel()
        targets = [EmptyTarget(), BallTarget(RhoBall(Configuration([[0.0]]), 0.25))]
        starts = [EMPTY, Configuration([[0.3]])]
        report = positive_measure_experiment(
            m, targets, starts, max_steps=150, replicas=50, seed=3, measure_samples=2_000
        )
        assert report.passed
        assert len(report.rows) == 4
        for row in report.rows:
            assert row.ci_low > 0 and row.hits > 0
            assert row.target_measure is not None and row.target_measure > 0
            assert row.case_seed == f"3:{row.case}"
        # the empty singleton carries exact unit mass
        assert report.rows[0].target_measure == 1.0

    def test_apparently_null_ball_is_refused(self):
        m = ContactModel()
        tiny = BallTarget(RhoBall(Configuration([[0.0], [1.0]]), 1e-7))
        with pytest.raises(ExperimentSetupError):
            positive_measure_experiment(
                m, [tiny], [EMPTY], max_steps=10, replicas=5, seed=1, measure_samples=3_000
            )

    def test_predicate_targets_are_rejected(self):
        m = ContactModel()
        with pytest.raises(ExperimentSetupError):
            positive_measure_experiment(
                m, [PredicateTarget(lambda s: True)], [EMPTY],
                max_steps=10, replicas=5, seed=1,
            )

    def test_needs_targets_and_starts(self):
        m = ContactModel()
        with pytest.raises(ExperimentSetupError):
            positive_measure_experiment(m, [], [EMPTY], max_steps=10, replicas=5, seed=1)
        with pytest.raises(ExperimentSetupError):
            positive_measure_experiment(
                m, [EmptyTarget()], [], max_steps=10, replicas=5, seed=1
            )

    def test_rows_reproducible_for_fixed_seed(self):
        m = ContactModel()
        args = dict(max_steps=80, replicas=40, seed=11, measure_samples=1_000)
        first = positive_measure_experiment(m, [EmptyTarget()], [EMPTY], **args)
        second = positive_measure_experiment(m, [EmptyTarget()], [EMPTY], **args)
        assert first.rows == second.rows


class TestNullSetExperiment:
    def test_clean_run_records_zero_hits(self):
        m = ContactModel()
        predicates = [
            ExactPointTarget((1.0,)),
            HyperplaneTarget(0, 0.25),
            PairDistanceTarget(1.0),
        ]
        report = null_set_experiment(
            m, predicates, [EMPTY], max_steps=40, replicas=50, seed=5
        )
        assert report.passed
        assert all(row.hits == 0 and row.target_measure == 0.0 for row in report.rows)
        assert report.failures == ()

    def test_seeded_start_inside_null_set_is_caught(self):
        # the start itself satisfies the pair predicate, so the very
        # first step lands in the set (births keep the pair, one death
        # keeps it too) and the experiment must fail with a replayable
        # trajectory attached
        m = ContactModel()
        predicate = PairDistanceTarget(1.0)
        start = Configuration([[0.0], [1.0], [5.0]])
        report = null_set_experiment(m, [predicate], [start], max_steps=5, replicas=20, seed=7)
        assert not report.passed
        assert report.rows[0].hits > 0
        assert len(report.failures) == report.rows[0].hits
        for traj in report.failures:
            assert traj.terminal_reason == "hit_target"
            assert predicate.contains(traj.final_state())

    def test_non_null_pieces_are_rejected(self):
        m = ContactModel()
        with pytest.raises(ExperimentSetupError):
            null_set_experiment(m, [EmptyTarget()], [EMPTY], max_steps=5, replicas=5, seed=1)
        with pytest.raises(ExperimentSetupError):
            null_set_experiment(
                m, [PredicateTarget(lambda s: False)], [EMPTY], max_steps=5, replicas=5, seed=1
            )

    def test_deterministic_rows(self):
        m = ContactModel()
        predicates = [ExactPointTarget((1.0,))]
        a = null_set_experiment(m, predicates, [EMPTY], max_steps=20, replicas=30, seed=9)
        b = null_set_experiment(m, predicates, [EMPTY], max_steps=20, replicas=30, seed=9)
        assert a.rows == b.rows


class TestOneStepNullPreservation:
    def test_poisson_states_are_never_flagged(self):
        m = ContactModel()
        states = poisson_states(m, 80, seed=13)
        report = one_step_null_preservation(m, ExactPointTarget((1.0,)), states, seed=13)
        assert report.passed
        assert report.rows[0].hits == 0
        assert report.rows[0].replicas == 80

    def test_constructed_witness_is_flagged(self):
        m = ContactModel()
        witness = Configuration([[1.0], [0.3]])
        states = poisson_states(m, 10, seed=17) + [witness]
        report = one_step_null_preservation(m, ExactPointTarget((1.0,)), states, seed=17)
        assert not report.passed
        assert report.rows[0].hits == 1

    def test_rejects_non_null_predicates_and_empty_input(self):
        m = ContactModel()
        with pytest.raises(ExperimentSetupError):
            one_step_null_preservation(m, EmptyTarget(), [EMPTY])
        with pytest.raises(ExperimentSetupError):
            one_step_null_preservation(m, ExactPointTarget((1.0,)), [])


class TestTheoremPipeline:
    def test_two_point_goal_passes(self):
        m = ContactModel()
        goal = Configuration([[-1.0 / 6.0], [1.0 / 6.0]])
        report = theorem_pipeline(m, goal, replicas=300, seed=19)
        assert report.passed
        row = report.rows[0]
        assert row.certified_bound is not None and row.certified_bound > 0
        assert row.ci_high >= row.certified_bound
        assert row.ci_low > 0

    def test_rejects_empty_goal(self):
        with pytest.raises(ExperimentSetupError):
            theorem_pipeline(ContactModel(), EMPTY, replicas=10, seed=1)

    def test_explicit_radius_below_quarter_is_used_directly(self):
        m = ContactModel()
        goal = Configuration([[0.1]])
        report = theorem_pipeline(m, goal, ball_radius=0.05, replicas=200, seed=23)
        assert report.passed
        assert "radius=0.05" in report.rows[0].target


class TestSuiteAndReports:
    def test_describe_configuration_formats(self):
        assert describe_configuration(EMPTY) == "empty"
        label = describe_configuration(Configuration([[0.5], [1.0]]))
        assert label.startswith("n=2[") and "0.5" in label

    def test_case_row_csv_dict_handles_optionals(self):
        row = CaseRow(
            experiment="x", case=0, start="empty", target="t", max_steps=1,
            replicas=2, hits=1, estimate=0.5, ci_low=0.1, ci_high=0.9,
            verdict="PASS", case_seed="0:0",
        )
        csv_dict = row.as_csv_dict()
        assert csv_dict["target_measure"] == ""
        assert csv_dict["certified_bound"] == ""
        assert csv_dict["estimate"] == "0.5"

    def test_default_suite_shape_and_determinism(self):
        m = ContactModel()
        first = run_default_suite(m, seed=29, sizes=SMALL)
        names = [r.experiment for r in first]
        assert names == [
            "positive_measure",
            "null_set",
            "one_step_null_preservation",
            "theorem_pipeline",
            "extinction",
        ]
        assert all(report.passed for report in first)
        second = run_default_suite(m, seed=29, sizes=SMALL)
        for a, b in zip(first, second):
            assert a.rows == b.rows

    def test_csv_round_trip_is_byte_identical(self, tmp_path):
        m = ContactModel()
        report = run_default_suite(m, seed=31, sizes=SMALL)[0]
        path_a = tmp_path / "a.csv"
        path_b = tmp_path / "b.csv"
        report.write_csv(path_a)
        report.write_csv(path_b)
        assert path_a.read_bytes() == path_b.read_bytes()
        header = path_a.read_text().splitlines()[0]
        assert header.startswith("experiment,case,start,target")
