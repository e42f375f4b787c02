"""Reference-measure evaluation and Poisson sampling tests.

Exact values are frozen from closed forms computed independently:
a layer-n all-in-box set weighs vol(box)^n / n!, a product of disjoint
boxes weighs the product of volumes, and the empty singleton weighs 1.
"""

import math

import numpy as np
import pytest

from birthdeath import (
    EMPTY,
    AllInRegion,
    BallRegion,
    BallSet,
    BoxRegion,
    Configuration,
    EmptySingleton,
    LayerSet,
    ProductOfDisjointBoxes,
    RhoBall,
    UnsupportedExactEvaluation,
    in_ball,
    lp_measure_estimate,
    lp_measure_exact,
    sample_in_ball,
    sample_poisson_config,
)

UNIT = BoxRegion((0.0,), (1.0,))


class TestRegions:
    def test_box_validation_and_volume(self):
        box = BoxRegion((0.0, -1.0), (2.0, 1.0))
        assert box.volume == 4.0
        assert box.contains((1.0, 0.0)) and not box.contains((3.0, 0.0))
        with pytest.raises(ValueError):
            BoxRegion((0.0,), (0.0,))
        with pytest.raises(ValueError):
            BoxRegion((0.0, 0.0), (1.0,))

    def test_ball_region_volume_matches_formula(self):
        ball = BallRegion((0.0, 0.0), 2.0)
        assert ball.volume == pytest.approx(math.pi * 4.0, rel=1e-12)
        assert ball.contains((2.0, 0.0))
        assert not ball.contains((2.0 + 1e-12, 0.0))

    def test_box_sampling_stays_inside(self):
        rng = np.random.default_rng(3)
        box = BoxRegion((-1.0, 2.0), (1.0, 5.0))
        for _ in range(200):
            assert box.contains(box.sample(rng))

    def test_ball_sampling_uniformity_moments(self):
        # in d=2 the radius of a uniform draw has E[R] = 2r/3; check 4 sigma
        rng = np.random.default_rng(4)
        draws = 4000
        total = 0.0
        for _ in range(draws):
            p = sample_in_ball((0.0, 0.0), 1.0, rng)
            r = math.hypot(*p)
            assert r <= 1.0
            total += r
        mean = total / draws
        sigma = math.sqrt(1.0 / 18.0 / draws)  # Var(R) = 1/18 for d=2
        assert abs(mean - 2.0 / 3.0) <= 4 * sigma

    def test_ball_sampling_d1_covers_both_sides(self):
        rng = np.random.default_rng(5)
        xs = [sample_in_ball((0.0,), 1.0, rng)[0] for _ in range(500)]
        assert min(xs) < -0.5 and max(xs) > 0.5
        assert all(abs(x) <= 1.0 for x in xs)


class TestLayerSets:
    def test_shape_layer_consistency(self):
        with pytest.raises(ValueError):
            LayerSet(1, EmptySingleton())
        with pytest.raises(ValueError):
            LayerSet(2, ProductOfDisjointBoxes((UNIT,)))
        with pytest.raises(ValueError):
            LayerSet(2, BallSet(RhoBall(Configuration([[0.0]]), 1.0)))
        with pytest.raises(ValueError):
            LayerSet(-1, EmptySingleton())

    def test_product_boxes_must_be_disjoint(self):
        with pytest.raises(ValueError):
            ProductOfDisjointBoxes((BoxRegion((0.0,), (1.0,)), BoxRegion((0.5,), (1.5,))))
        # touching at a face is fine (zero-volume overlap)
        ProductOfDisjointBoxes((BoxRegion((0.0,), (1.0,)), BoxRegion((1.0,), (2.0,))))

    def test_contains_product_requires_one_point_per_box(self):
        shape = ProductOfDisjointBoxes(
            (BoxRegion((0.0,), (1.0,)), BoxRegion((2.0,), (3.0,)))
        )
        ls = LayerSet(2, shape)
        assert ls.contains(Configuration([[0.5], [2.5]]))
        assert not ls.contains(Configuration([[0.2], [0.8]]))
        assert not ls.contains(Configuration([[0.5], [4.0]]))
        assert not ls.contains(Configuration([[0.5]]))

    def test_contains_all_in_region(self):
        ls = LayerSet(2, AllInRegion(UNIT))
        assert ls.contains(Configuration([[0.25], [0.75]]))
        assert not ls.contains(Configuration([[0.25], [1.75]]))
        assert not ls.contains(Configuration([[0.25]]))


class TestExactMeasure:
    def test_empty_singleton_is_unit_mass(self):
        assert lp_measure_exact(LayerSet(0, EmptySingleton())) == 1.0

    def test_all_in_region_layer_values(self):
        assert lp_measure_exact(LayerSet(1, AllInRegion(UNIT))) == 1.0
        assert lp_measure_exact(LayerSet(2, AllInRegion(UNIT))) == 0.5
        assert lp_measure_exact(LayerSet(3, AllInRegion(UNIT))) == pytest.approx(1.0 / 6.0)
        wide = BoxRegion((0.0,), (2.0,))
        assert lp_measure_exact(LayerSet(2, AllInRegion(wide))) == 2.0

    def test_product_of_boxes_value(self):
        shape = ProductOfDisjointBoxes(
            (BoxRegion((0.0,), (1.0,)), BoxRegion((2.0,), (4.0,)))
        )
        assert lp_measure_exact(LayerSet(2, shape)) == 2.0

    def test_ball_sets_have_no_closed_form(self):
        ball = RhoBall(Configuration([[0.0]]), 0.5)
        with pytest.raises(UnsupportedExactEvaluation):
            lp_measure_exact(LayerSet(1, BallSet(ball)))

    def test_additivity_over_disjoint_products(self):
        a = LayerSet(1, ProductOfDisjointBoxes((BoxRegion((0.0,), (1.0,)),)))
        b = LayerSet(1, ProductOfDisjointBoxes((BoxRegion((2.0,), (2.5,)),)))
        union_window = BoxRegion((0.0,), (2.5,))
        est = lp_measure_estimate(
            1,
            union_window,
            lambda cfg: a.contains(cfg) or b.contains(cfg),
            samples=40_000,
            seed=12,
        )
        expected = lp_measure_exact(a) + lp_measure_exact(b)
        assert abs(est.value - expected) <= 4 * est.std_error


class TestEstimate:
    def test_layer0_is_exact(self):
        est = lp_measure_estimate(0, UNIT, lambda cfg: len(cfg) == 0, samples=10, seed=0)
        assert est.value == 1.0 and est.std_error == 0.0
        est = lp_measure_estimate(0, UNIT, lambda cfg: False, samples=10, seed=0)
        assert est.value == 0.0

    def test_always_true_layer1_hits_volume(self):
        est = lp_measure_estimate(1, UNIT, lambda cfg: True, samples=1000, seed=1)
        assert est.value == 1.0 and est.hits == 1000 and est.std_error == 0.0

    def test_matches_exact_on_box_set(self):
        inner = BoxRegion((0.2,), (0.8,))
        target = LayerSet(2, AllInRegion(inner))
        est = lp_measure_estimate(2, UNIT, target.contains, samples=60_000, seed=2)
        exact = lp_measure_exact(target)  # 0.6^2/2 = 0.18
        assert exact == pytest.approx(0.18)
        assert abs(est.value - exact) <= 4 * est.std_error

    def test_ball_example_frozen_oracle(self):
        # two uniform points in [0,1] land within 0.1 of {0.25, 0.75} in
        # the bottleneck sense iff one hits [0.15,0.35] and the other
        # [0.65,0.85]: probability 2*(0.2*0.2), times vol^2/2! = 0.04
        ball = RhoBall(Configuration([[0.25], [0.75]]), 0.1)
        est = lp_measure_estimate(
            2, UNIT, lambda cfg: in_ball(cfg, ball), samples=50_000, seed=3
        )
        assert abs(est.value - 0.04) <= 3 * est.std_error

    def test_sym_consistency_product_boxes(self):
        # the ordered-tuple measure of the preimage under the
        # order-forgetting projection is n! times the layer measure;
        # estimated by drawing ordered tuples directly
        rng = np.random.default_rng(8)
        for n in (1, 2, 3):
            boxes = tuple(
                BoxRegion((2.0 * k,), (2.0 * k + 1.0,)) for k in range(n)
            )
            layer_set = LayerSet(n, ProductOfDisjointBoxes(boxes))
            window_lo, window_hi = 0.0, 2.0 * (n - 1) + 1.0
            volume = (window_hi - window_lo) ** n
            draws = 40_000
            tuples = rng.uniform(window_lo, window_hi, size=(draws, n))
            hits = 0
            for row in tuples:
                pts = [(float(x),) for x in row]
                if len(set(pts)) < n:
                    continue
                if layer_set.contains(Configuration(pts)):
                    hits += 1
            frac = hits / draws
            ordered_measure = volume * frac
            expected = math.factorial(n) * lp_measure_exact(layer_set)
            sigma = volume * math.sqrt(max(frac * (1 - frac), 1e-12) / draws)
            assert abs(ordered_measure - expected) <= 4 * sigma

    def test_deterministic_for_fixed_seed_and_workers(self):
        ball = RhoBall(Configuration([[0.4], [0.6]]), 0.15)
        kwargs = dict(samples=5000, seed=21)
        first = lp_measure_estimate(2, UNIT, lambda c: in_ball(c, ball), **kwargs)
        second = lp_measure_estimate(2, UNIT, lambda c: in_ball(c, ball), **kwargs)
        assert first == second
        third = lp_measure_estimate(
            2, UNIT, lambda c: in_ball(c, ball), samples=5000, seed=21, workers=3
        )
        fourth = lp_measure_estimate(
            2, UNIT, lambda c: in_ball(c, ball), samples=5000, seed=21, workers=3
        )
        assert third == fourth
        assert abs(third.value - first.value) <= 4 * (first.std_error + third.std_error)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            lp_measure_estimate(-1, UNIT, lambda c: True, samples=10)
        with pytest.raises(ValueError):
            lp_measure_estimate(1, UNIT, lambda c: True, samples=0)


class TestPoissonSampler:
    def test_points_inside_window_and_distinct(self):
        rng = np.random.default_rng(31)
        window = BoxRegion((0.0, 0.0), (2.0, 1.0))
        for _ in range(100):
            cfg = sample_poisson_config(1.5, window, rng)
            pts = cfg.points
            assert len(set(pts)) == len(pts)
            for p in pts:
                assert window.contains(p)

    def test_count_moments(self):
        rng = np.random.default_rng(32)
        window = BoxRegion((0.0,), (1.0,))
        z = 2.0
        draws = 10_000
        counts = [len(sample_poisson_config(z, window, rng)) for _ in range(draws)]
        mean = sum(counts) / draws
        var = sum((c - mean) ** 2 for c in counts) / draws
        # Poisson(2): sd of the sample mean is sqrt(2/draws)
        assert abs(mean - z) <= 4 * math.sqrt(z / draws)
        # sample variance of Poisson(z): Var = z + 2z^2 over draws
        assert abs(var - z) <= 4 * math.sqrt((z + 2 * z * z) / draws)

    def test_tiny_intensity_returns_empty(self):
        rng = np.random.default_rng(33)
        window = BoxRegion((0.0,), (1.0,))
        draws = [sample_poisson_config(1e-9, window, rng) for _ in range(500)]
        assert all(cfg == EMPTY for cfg in draws)

    def test_intensity_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_poisson_config(0.0, BoxRegion((0.0,), (1.0,)), 1)

    def test_seed_reproducibility(self):
        window = BoxRegion((0.0,), (3.0,))
        a = sample_poisson_config(1.0, window, np.random.default_rng(77))
        b = sample_poisson_config(1.0, window, np.random.default_rng(77))
        assert a == b
