"""
Tests for t-test screening and the repeated-split evaluation
"""
import numpy as np
import pandas as pd
import pytest
from scipy import stats
from structlog.testing import capture_logs

from app.core.errors import DataError, DimensionMismatch, InsufficientSamples
from app.core.numerics import SeedSpec, rng_stream
from app.ml.classifiers import NpLevels
from app.ml.screening import (
    ScreenPlan,
    TabularDataset,
    load_tabular_csv,
    make_synthetic_dataset,
    run_screen_eval,
    screen_report_frame,
    screen_top_k,
    stratified_split,
    two_sample_t,
)


def _dataset(columns, labels):
    features = np.column_stack(columns).astype(float)
    return TabularDataset(features, np.asarray(labels), tuple(f"f{i}" for i in range(features.shape[1])))


class TestTwoSampleT:
    def test_hand_values(self):
        data = _dataset([[1, 2, 3, 2, 3, 4]], [0, 0, 0, 1, 1, 1])
        t_stat, p_value = two_sample_t(data, 0)
        assert t_stat == pytest.approx(-1.2247, abs=1e-4)
        assert p_value == pytest.approx(0.288, abs=1e-3)

    def test_constant_feature(self):
        data = _dataset([[5, 5, 5, 5, 5, 5]], [0, 0, 0, 1, 1, 1])
        with capture_logs() as logs:
            t_stat, p_value = two_sample_t(data, 0)
        assert (t_stat, p_value) == (0.0, 1.0)
        assert any(e["event"] == "zero_pooled_variance" for e in logs)

    def test_perfect_separation(self):
        data = _dataset([[0, 1e-9, 1, 1 + 1e-9]], [0, 0, 1, 1])
        _, p_value = two_sample_t(data, 0)
        assert p_value < 1e-6

    def test_agrees_with_scipy_pooled_test(self):
        rng = rng_stream(SeedSpec(11))
        labels = np.r_[np.zeros(15), np.ones(12)]
        columns = rng.standard_normal((27, 4)) + labels[:, None] * np.array([0.0, 0.5, 1.0, 2.0])
        data = _dataset(list(columns.T), labels)
        for j in range(4):
            reference = stats.ttest_ind(columns[labels == 0, j], columns[labels == 1, j], equal_var=True)
            t_stat, p_value = two_sample_t(data, j)
            assert t_stat == pytest.approx(reference.statistic, rel=1e-12)
            assert p_value == pytest.approx(reference.pvalue, rel=1e-9)

    def test_constant_column_ranks_behind_signal(self):
        data = _dataset([[5] * 6, [1, 2, 3, 2, 3, 4]], [0, 0, 0, 1, 1, 1])
        with capture_logs() as logs:
            ranked = screen_top_k(data, 2)
        assert ranked == [1, 0]
        warnings = [e for e in logs if e["event"] == "zero_pooled_variance"]
        assert len(warnings) == 1 and warnings[0]["features"] == 1


class TestScreenTopK:
    def test_separating_feature_ranks_first(self):
        rng = rng_stream(SeedSpec(1))
        labels = np.r_[np.zeros(20), np.ones(20)]
        noise = rng.standard_normal((40, 5))
        signal = labels * 5.0 + rng.standard_normal(40) * 0.1
        data = _dataset([noise[:, 0], noise[:, 1], signal, noise[:, 2], noise[:, 3], noise[:, 4]], labels)
        assert screen_top_k(data, 1) == [2]

    def test_all_features(self):
        data = make_synthetic_dataset(8, 2, 10, 10, 1.0, SeedSpec(2))
        assert sorted(screen_top_k(data, 8)) == list(range(8))

    def test_ties_keep_index_order(self):
        data = _dataset([[1] * 6, [2] * 6, [3] * 6], [0, 0, 0, 1, 1, 1])
        assert screen_top_k(data, 2) == [0, 1]

    def test_k_out_of_range(self):
        data = make_synthetic_dataset(3, 1, 10, 10, 1.0, SeedSpec(3))
        with pytest.raises(DimensionMismatch):
            screen_top_k(data, 4)


class TestStratifiedSplit:
    def test_counts_per_class(self):
        labels = np.r_[np.zeros(83), np.ones(91)].astype(np.int8)
        train, test = stratified_split(labels, 0.7, SeedSpec(4))
        assert (labels[train] == 0).sum() == 58
        assert (labels[train] == 1).sum() == 64
        assert len(np.intersect1d(train, test)) == 0
        assert len(train) + len(test) == 174


class TestScreenEval:
    def test_synthetic_dataset(self):
        data = make_synthetic_dataset(2000, 40, 83, 91, 1.5, SeedSpec(5))
        plan = ScreenPlan(top_k=40, reps=10, levels=NpLevels(alpha=0.05, delta=0.1), base_seed=6)
        report = run_screen_eval(data, plan)
        assert report.ok_reps == 10
        assert report.mean_type1 <= 0.05
        assert report.mean_type2 < 0.9
        assert report.selection_counts(2000)[:40].sum() > 0.9 * 400

    def test_is_deterministic(self):
        data = make_synthetic_dataset(200, 10, 40, 40, 1.0, SeedSpec(7))
        plan = ScreenPlan(top_k=10, reps=4, base_seed=8)
        assert run_screen_eval(data, plan).model_dump() == run_screen_eval(data, plan).model_dump()

    @pytest.mark.parametrize("base_seed", range(5))
    def test_screening_ignores_test_rows(self, base_seed):
        base = make_synthetic_dataset(50, 5, 60, 60, 2.0, SeedSpec(100 + base_seed))
        _, test_idx = stratified_split(base.labels, 0.7, SeedSpec(base_seed, 0))
        sentinel = rng_stream(SeedSpec(200 + base_seed)).standard_normal(base.labels.shape[0])
        sentinel[test_idx] += base.labels[test_idx] * 10.0
        data = TabularDataset(
            np.column_stack([base.features, sentinel]), base.labels, base.feature_names + ("sentinel",)
        )
        plan = ScreenPlan(top_k=5, reps=1, base_seed=base_seed)
        report = run_screen_eval(data, plan)
        assert 50 not in report.repetitions[0].selected

    def test_too_many_features_for_training_size(self):
        data = make_synthetic_dataset(100, 5, 20, 20, 1.0, SeedSpec(9))
        with pytest.raises(InsufficientSamples):
            run_screen_eval(data, ScreenPlan(top_k=40, reps=1))

    def test_report_frame(self):
        data = make_synthetic_dataset(60, 5, 40, 40, 1.0, SeedSpec(10))
        report = run_screen_eval(data, ScreenPlan(top_k=5, reps=3, base_seed=1))
        frame = screen_report_frame(report)
        assert list(frame.columns) == ["rep_index", "status", "type1_emp", "type2_emp"]
        assert frame["rep_index"].tolist() == [0, 1, 2]


class TestLoadCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "data.csv"
        pd.DataFrame({"g1": [0.1, 0.2, 0.3, 0.4], "g2": [1.0, 2.0, 3.0, 4.0], "y": [0, 0, 1, 1]}).to_csv(
            path, index=False
        )
        data = load_tabular_csv(path, "y")
        assert data.feature_names == ("g1", "g2")
        assert data.labels.tolist() == [0, 0, 1, 1]

    def test_missing_label_column(self, tmp_path):
        path = tmp_path / "data.csv"
        pd.DataFrame({"g1": [0.1, 0.2], "y": [0, 1]}).to_csv(path, index=False)
        with pytest.raises(DataError):
            load_tabular_csv(path, "label")

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("g1,y\n0.1,0\nabc,1\n")
        with pytest.raises(DataError):
            load_tabular_csv(path, "y")

    def test_single_class(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("g1,y\n0.1,0\n0.2,0\n")
        with pytest.raises(DataError):
            load_tabular_csv(path, "y")
