"""
Long Monte-Carlo runs of the built-in studies against reference error rates

Run with ``pytest -m slow``.
"""
import math

import numpy as np
import pytest

from app.core.linalg import SpdMatrix
from app.core.numerics import SeedSpec
from app.experiments.config import builtin_config
from app.experiments.io import write_csv
from app.experiments.runner import run_experiment
from app.ml.classifiers import NpLevels, left_out_count, umbrella_order, umbrella_violation_bound
from app.ml.model import LdaModel
from app.ml.rmt import LEMMA2_QUANTITIES, verify_lemma2, verify_theta_clt

pytestmark = pytest.mark.slow


def _rows(result, method):
    return {row.axis_value: row for row in result.aggregates if row.method == method}


def _isotropic_model(p: int, delta_d: float) -> LdaModel:
    mu1 = np.zeros(p)
    mu1[0] = math.sqrt(delta_d)
    return LdaModel(mu0=np.zeros(p), mu1=mu1, sigma=SpdMatrix(np.eye(p)))


@pytest.fixture(scope="module")
def balanced_growth():
    return run_experiment(builtin_config("1a"), workers=4)


def test_toy_table():
    result = run_experiment(builtin_config("toy_table1"), workers=4)
    elda = _rows(result, "elda")[50]
    assert 0.025 <= elda.mean_type1 <= 0.040
    assert 0.42 <= elda.mean_type2 <= 0.48
    assert elda.violation_rate <= 0.1 + 0.05


def test_violation_rates_over_n0(balanced_growth):
    elda = _rows(balanced_growth, "elda")
    assert elda[120].violation_rate == pytest.approx(0.108, abs=0.03)
    assert elda[500].violation_rate == pytest.approx(0.101, abs=0.03)
    assert all(row.violation_rate <= 0.15 for n0, row in elda.items() if n0 >= 120)
    assert _rows(balanced_growth, "felda")[1000].violation_rate == pytest.approx(0.100, abs=0.03)
    assert _rows(balanced_growth, "umbrella_lda")[20].feasible_fraction == 0.0


def test_umbrella_violation_rate_within_order_statistic_bound(balanced_growth):
    cfg = builtin_config("1a")
    checked = 0
    for n0, row in _rows(balanced_growth, "umbrella_lda").items():
        if row.feasible_fraction == 0.0:
            continue
        m = left_out_count(n0, cfg.split_frac)
        bound = umbrella_violation_bound(m, umbrella_order(m, cfg.levels), cfg.alpha)
        sigma = math.sqrt(bound * (1.0 - bound) / round(row.feasible_fraction * cfg.reps))
        assert row.violation_rate <= bound + 3 * sigma, n0
        checked += 1
    assert checked >= 5


def test_violation_rates_with_fixed_n1():
    cfg = builtin_config("1b").model_copy(update={"methods": ["elda"]})
    elda = _rows(run_experiment(cfg, workers=4), "elda")
    # every grid point has n0 + 500 >= 240
    assert all(row.violation_rate <= 0.1 + 0.05 for row in elda.values())


def test_fixed_dimension_threshold_breaks_at_p30():
    cfg = builtin_config("1c").model_copy(update={"p_grid": [30]})
    result = run_experiment(cfg, workers=4)
    assert _rows(result, "felda")[30].violation_rate > 0.6
    assert _rows(result, "elda")[30].violation_rate <= 0.15


def test_quadratic_forms_concentrate_at_root_n_rate():
    medians = {}
    for n in (500, 1000, 2000):
        model = _isotropic_model(n // 10, 4.0)
        rows = verify_lemma2(model, n // 2, n // 2, 1600, SeedSpec(7, n), workers=4)
        medians[n] = {row.quantity: row.median_rel_dev for row in rows}
    for quantity in LEMMA2_QUANTITIES:
        for small, large in ((500, 1000), (1000, 2000)):
            ratio = medians[small][quantity] / medians[large][quantity]
            assert 1.2 <= ratio <= 1.8, (quantity, small)


def test_single_feature_concentration():
    rows = verify_lemma2(_isotropic_model(1, 4.0), 5000, 5000, 50, SeedSpec(8), workers=4)
    assert all(row.median_rel_dev < 0.05 for row in rows)


@pytest.mark.parametrize("p, n0, variance_band", [(40, 200, (0.85, 1.15)), (2, 1000, (0.9, 1.1))])
def test_threshold_clt(p, n0, variance_band):
    row = verify_theta_clt(_isotropic_model(p, 4.0), NpLevels(alpha=0.05, delta=0.1), n0, n0, 2000, SeedSpec(9), workers=4)
    assert row.ks_stat < 0.05
    low, high = variance_band
    assert low <= row.var_z <= high


def test_byte_identical_output_across_worker_counts(tmp_path):
    cfg = builtin_config("1d").model_copy(update={"reps": 20, "test_per_class": 5000, "p_grid": [3, 15, 30]})
    for workers in (1, 8):
        result = run_experiment(cfg, workers=workers)
        write_csv(result.records, tmp_path / f"records_{workers}.csv")
        write_csv(result.aggregates, tmp_path / f"aggregates_{workers}.csv")
    assert (tmp_path / "records_1.csv").read_bytes() == (tmp_path / "records_8.csv").read_bytes()
    assert (tmp_path / "aggregates_1.csv").read_bytes() == (tmp_path / "aggregates_8.csv").read_bytes()
