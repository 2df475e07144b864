"""
Tests for eLDA, feLDA and the NP umbrella baseline
"""
import math

import numpy as np
import pytest
from sklearn.discriminant_analysis import LinearDiscriminantAnalysis

from app.core.errors import InsufficientSamples, InvalidLevel, NonPositiveSignal
from app.core.numerics import SeedSpec, rng_stream, std_normal_quantile
from app.ml.classifiers import (
    LdaScorer,
    LinearScore,
    NpLevels,
    ScoredClassifier,
    elda_f_hat,
    elda_train,
    elda_variance,
    felda_train,
    left_out_count,
    predict,
    umbrella_min_size,
    umbrella_order,
    umbrella_train,
    umbrella_violation_bound,
)
from app.ml.model import build_flat_beta_model
from app.ml.sampling import LabeledSample, compute_stats, sample_gaussian


def _random_stats(seed: int, p: int = 5, n0: int = 60, n1: int = 40):
    model = build_flat_beta_model(p, 0.5, 1.0)
    return compute_stats(sample_gaussian(model, n0, n1, SeedSpec(seed)))


class TestNpLevels:
    def test_accepts_interior(self):
        levels = NpLevels(alpha=0.1, delta=0.05)
        assert (levels.alpha, levels.delta) == (0.1, 0.05)

    @pytest.mark.parametrize("alpha, delta", [(0.0, 0.1), (0.1, 1.0), (1.2, 0.1)])
    def test_rejects_boundary(self, alpha, delta):
        with pytest.raises(InvalidLevel):
            NpLevels(alpha=alpha, delta=delta)


class TestElda:
    def test_hand_example_is_non_positive(self, hand_sample, levels):
        with pytest.raises(NonPositiveSignal) as info:
            elda_train(compute_stats(hand_sample), levels)
        assert info.value.context["s_term"] == pytest.approx(-0.625)

    @pytest.mark.parametrize("seed", range(20))
    def test_zero_ratio_reduces_to_felda(self, seed):
        stats = _random_stats(seed).with_ratio(0.0)
        levels = NpLevels(alpha=0.1, delta=0.1)
        assert elda_train(stats, levels).threshold == pytest.approx(
            felda_train(stats, levels).threshold, rel=1e-12, abs=1e-12
        )

    def test_half_delta_threshold_is_f_hat(self):
        stats = _random_stats(1)
        clf = elda_train(stats, NpLevels(alpha=0.1, delta=0.5))
        assert clf.threshold == pytest.approx(elda_f_hat(stats, 0.1), abs=1e-12)

    def test_variance_terms_match_closed_forms(self):
        stats = _random_stats(2, p=10, n0=50, n1=50)
        alpha = 0.1
        r, n, n0, n1 = stats.r, stats.n, stats.n0, stats.n1
        v1sq = n**2 / (n0 * n1)
        s = (1 - r) * stats.signal - r * v1sq
        c = (1 - r) / (2 * math.sqrt(stats.signal))
        phi = std_normal_quantile(1 - alpha)
        cross = 2 * c * phi * math.sqrt(v1sq) * math.sqrt(n1 / n0)
        v1 = s * c**2 * phi**2 * 2 * (1 + r) / (1 - r) ** 7
        v2 = c**2 * phi**2 * v1sq * 4 * r * (1 + r) / (1 - r) ** 7 + n / (n0 * (1 - r) ** 3) + cross * 2 * r / (1 - r) ** 5
        v3 = v1sq / s * (
            c**2 * phi**2 * v1sq * 2 * r**2 * (1 + r) / (1 - r) ** 7
            + (n + n1) * r / (n0 * (1 - r) ** 3)
            + cross * 2 * r**2 / (1 - r) ** 5
        )
        breakdown = elda_variance(stats, alpha)
        assert breakdown.s_term == pytest.approx(s, rel=1e-12)
        assert (breakdown.v1, breakdown.v2, breakdown.v3) == pytest.approx((v1, v2, v3), rel=1e-10)

    def test_threshold_decreases_with_delta(self):
        stats = _random_stats(3)
        thresholds = [elda_train(stats, NpLevels(alpha=0.1, delta=d)).threshold for d in (0.01, 0.05, 0.1, 0.3)]
        assert all(a > b for a, b in zip(thresholds, thresholds[1:]))

    def test_translation_equivariance(self):
        model = build_flat_beta_model(4, 0.5, 1.0)
        sample = sample_gaussian(model, 80, 80, SeedSpec(4))
        offset = np.array([3.0, -1.0, 0.5, 10.0])
        levels = NpLevels(alpha=0.05, delta=0.1)
        base = elda_train(compute_stats(sample), levels)
        moved = elda_train(compute_stats(sample.shifted(offset)), levels)
        assert np.allclose(base.direction, moved.direction, atol=1e-9)
        assert moved.threshold == pytest.approx(base.threshold + base.direction @ offset, abs=1e-8)

        points = rng_stream(SeedSpec(5)).normal(size=(200, 4))
        assert np.array_equal(base.predict(points), moved.predict(points + offset))

    def test_direction_matches_sklearn_lda(self):
        model = build_flat_beta_model(6, 0.5, 0.8)
        sample = sample_gaussian(model, 120, 90, SeedSpec(6))
        x = np.vstack([sample.x0, sample.x1])
        y = np.concatenate([np.zeros(sample.n0), np.ones(sample.n1)])
        coef = LinearDiscriminantAnalysis(solver="lsqr").fit(x, y).coef_[0]
        a_hat = compute_stats(sample).a_hat
        cosine = coef @ a_hat / (np.linalg.norm(coef) * np.linalg.norm(a_hat))
        assert cosine > 1 - 1e-10


class TestFelda:
    def test_hand_example(self, hand_sample, levels):
        clf = felda_train(compute_stats(hand_sample), levels)
        assert clf.threshold == pytest.approx(2.493, abs=1e-3)
        assert clf.method == "felda"

    def test_half_delta_threshold(self, hand_sample):
        clf = felda_train(compute_stats(hand_sample), NpLevels(alpha=0.05, delta=0.5))
        assert clf.threshold == pytest.approx(math.sqrt(0.5) * std_normal_quantile(0.95) + 0.5, abs=1e-12)

    def test_predict_helper_returns_scalar(self, hand_sample, levels):
        clf = felda_train(compute_stats(hand_sample), levels)
        assert predict(clf, np.array([100.0])) == 1
        assert predict(clf, np.array([[0.0], [100.0]])).tolist() == [0, 1]


class TestUmbrellaOrder:
    @pytest.mark.parametrize("alpha, delta, expected", [(0.05, 0.1, 45), (0.1, 0.05, 29), (0.5, 0.5, 1)])
    def test_min_size(self, alpha, delta, expected):
        assert umbrella_min_size(alpha, delta) == expected

    @pytest.mark.parametrize("delta", [0.1, 0.05])
    def test_order_for_63(self, delta):
        assert umbrella_order(63, NpLevels(alpha=0.1, delta=delta)) == 61

    def test_infeasible_below_min_size(self):
        assert umbrella_order(44, NpLevels(alpha=0.05, delta=0.1)) is None

    @pytest.mark.parametrize("m", [45, 63, 100, 500])
    def test_order_is_minimal(self, m):
        levels = NpLevels(alpha=0.05, delta=0.1)
        k = umbrella_order(m, levels)
        assert umbrella_violation_bound(m, k, levels.alpha) <= levels.delta
        if k > 1:
            assert umbrella_violation_bound(m, k - 1, levels.alpha) > levels.delta

    def test_left_out_rounds_half_up(self):
        assert left_out_count(125, 0.5) == 63
        assert left_out_count(20, 0.5) == 10


class TestUmbrellaTrain:
    def test_too_few_class0_points(self, levels):
        model = build_flat_beta_model(3, 0.5, 1.0)
        sample = sample_gaussian(model, 20, 20, SeedSpec(7))
        with pytest.raises(InsufficientSamples):
            umbrella_train(sample, levels, SeedSpec(8))

    def test_top_order_uses_maximum_held_out_score(self, levels):
        model = build_flat_beta_model(3, 0.5, 1.0)
        sample = sample_gaussian(model, 90, 50, SeedSpec(9))
        seed = SeedSpec(10)
        clf = umbrella_train(sample, levels, seed)
        assert isinstance(clf, ScoredClassifier)
        assert (clf.left_out, clf.order) == (45, 45)
        assert clf.method == "umbrella_lda"

        held_out = sample.x0[rng_stream(seed).permutation(90)[:45]]
        assert clf.threshold == pytest.approx(clf.decision(held_out).max())
        assert not clf.predict(held_out).any()

    def test_is_deterministic(self, levels):
        model = build_flat_beta_model(3, 0.5, 1.0)
        sample = sample_gaussian(model, 125, 125, SeedSpec(11))
        a = umbrella_train(sample, levels, SeedSpec(12))
        b = umbrella_train(sample, levels, SeedSpec(12))
        assert a.threshold == b.threshold

    def test_linear_equivalent(self, levels):
        model = build_flat_beta_model(3, 0.5, 1.0)
        sample = sample_gaussian(model, 125, 125, SeedSpec(13))
        clf = umbrella_train(sample, levels, SeedSpec(14))
        linear = clf.to_linear()
        points = rng_stream(SeedSpec(15)).normal(size=(50, 3))
        assert np.array_equal(linear.predict(points), clf.predict(points))

    def test_custom_scorer(self, levels):
        class FirstCoordinate:
            name = "first"

            def fit(self, sample: LabeledSample) -> LinearScore:
                return LinearScore(np.eye(sample.p)[0])

        model = build_flat_beta_model(3, 0.5, 1.0)
        sample = sample_gaussian(model, 125, 40, SeedSpec(16))
        clf = umbrella_train(sample, levels, SeedSpec(17), scorer=FirstCoordinate())
        assert clf.method == "umbrella_first"
        assert np.array_equal(clf.scorer.direction, [1.0, 0.0, 0.0])

    def test_default_scorer_name(self):
        assert LdaScorer.name == "lda"
