"""
Tests for the np-lda command line
"""
import json
import logging

import pandas as pd
import pytest

from app.cli.main import build_parser, main
from app.core.numerics import SeedSpec
from app.ml.classifiers import umbrella_violation_bound
from app.ml.model import build_flat_beta_model, oracle_type2
from app.ml.screening import make_synthetic_dataset


def _output(console) -> str:
    return console.file.getvalue()


def _error_line(capsys) -> dict:
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


class TestParser:
    def test_registers_every_subcommand(self, console):
        parser = build_parser(console)
        text = parser.format_help()
        for name in ("simulate", "oracle", "rmt-check", "clt-check", "lemma2-check", "umbrella-k", "screen"):
            assert name in text

    def test_unknown_subcommand_exits(self, console):
        with pytest.raises(SystemExit):
            main(["bogus"], console=console)

    def test_logging_setup_is_inert_under_tests(self, console):
        root = logging.getLogger()
        handlers = list(root.handlers)
        assert main(["umbrella-k", "--m", "63", "--alpha", "0.1", "--delta", "0.1"], console=console) == 0
        assert root.handlers == handlers


class TestUmbrellaCommand:
    def test_order_for_63(self, console):
        assert main(["umbrella-k", "--m", "63", "--alpha", "0.1", "--delta", "0.1"], console=console) == 0
        out = _output(console)
        assert "61" in out
        assert f"{umbrella_violation_bound(63, 61, 0.1):.6g}" in out

    def test_infeasible(self, console):
        assert main(["umbrella-k", "--m", "44", "--alpha", "0.05", "--delta", "0.1"], console=console) == 0
        assert "infeasible" in _output(console)

    def test_invalid_level(self, console, capsys):
        assert main(["umbrella-k", "--m", "63", "--alpha", "1.5", "--delta", "0.1"], console=console) == 2
        assert _error_line(capsys)["error"] == "invalid_level"


class TestOracleCommand:
    def test_calibrated(self, console):
        args = ["oracle", "--p", "3", "--rho", "0.5", "--target-type2", "0.236", "--alpha", "0.1"]
        assert main(args, console=console) == 0
        out = _output(console)
        assert "0.853" in out and "0.236" in out

    def test_flat_beta(self, console):
        assert main(["oracle", "--p", "3", "--beta-scale", "1.2", "--alpha", "0.1"], console=console) == 0
        model = build_flat_beta_model(3, 0.5, 1.2)
        assert f"{oracle_type2(model, 0.1):.6g}" in _output(console)


class TestRmtCheckCommand:
    def test_passes(self, console, tmp_path):
        out = tmp_path / "rmt.csv"
        assert main(["rmt-check", "--r", "0.25", "--out", str(out)], console=console) == 0
        frame = pd.read_csv(out)
        assert frame["passed"].all()
        assert "0.6666666667" in _output(console)

    def test_ratio_out_of_range(self, console, capsys):
        assert main(["rmt-check", "--r", "1.5"], console=console) == 2
        assert _error_line(capsys)["error"] == "config_error"


class TestVerificationCommands:
    def test_lemma2(self, console, tmp_path):
        out = tmp_path / "lemma2.csv"
        args = ["lemma2-check", "--p", "20", "--n0", "100", "--n1", "100", "--reps", "10", "--seed", "3", "--out", str(out)]
        assert main(args, console=console) == 0
        assert pd.read_csv(out)["quantity"].tolist() == ["a_sigma_a", "signal", "a_mu_d", "a_mu0_shift"]

    def test_lemma2_too_few_samples(self, console, capsys):
        args = ["lemma2-check", "--p", "20", "--n0", "10", "--n1", "10", "--reps", "2"]
        assert main(args, console=console) == 2
        assert _error_line(capsys)["error"] == "insufficient_samples"

    def test_clt(self, console, tmp_path):
        out = tmp_path / "clt.csv"
        args = ["clt-check", "--p", "10", "--n0", "100", "--n1", "100", "--reps", "30", "--seed", "4", "--out", str(out)]
        assert main(args, console=console) == 0
        frame = pd.read_csv(out)
        assert frame.loc[0, "quantity"] == "theta_clt"
        assert 0.0 <= frame.loc[0, "ks_stat"] <= 1.0


class TestSimulateCommand:
    def test_builtin_example(self, console, tmp_path):
        args = ["simulate", "--example", "toy_table1", "--reps", "2", "--seed", "7", "--out", str(tmp_path)]
        assert main(args, console=console) == 0
        records = pd.read_csv(tmp_path / "toy_table1_records.csv")
        aggregates = pd.read_csv(tmp_path / "toy_table1_aggregates.csv")
        assert len(records) == 6
        assert aggregates["method"].tolist() == ["elda", "felda", "oracle"]
        assert "toy_table1" in _output(console)

    def test_unknown_example(self, console, capsys, tmp_path):
        assert main(["simulate", "--example", "9z", "--out", str(tmp_path)], console=console) == 2
        assert _error_line(capsys)["error"] == "unknown_example"

    def test_config_with_unknown_key(self, console, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"name": "x", "beta_scale": 1.0, "n0_grid": [50], "n1_grid": [50], "p_grid": [3], "typo": 1}))
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path)], console=console) == 2
        assert _error_line(capsys)["error"] == "config_error"

    def test_config_file(self, console, tmp_path):
        path = tmp_path / "study.json"
        config = {
            "name": "small",
            "beta_scale": 1.0,
            "n0_grid": [60, 80],
            "n1_grid": [60],
            "p_grid": [3],
            "reps": 2,
            "test_per_class": 1000,
            "methods": ["elda", "umbrella_lda"],
        }
        path.write_text(json.dumps(config))
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path)], console=console) == 0
        aggregates = pd.read_csv(tmp_path / "small_aggregates.csv")
        assert aggregates["axis_value"].tolist() == [60, 80, 60, 80]


class TestScreenCommand:
    def test_writes_reports(self, console, tmp_path):
        data = make_synthetic_dataset(60, 5, 40, 40, 1.5, SeedSpec(1))
        frame = pd.DataFrame(data.features, columns=data.feature_names)
        frame["label"] = data.labels
        path = tmp_path / "genes.csv"
        frame.to_csv(path, index=False)

        args = ["screen", "--data", str(path), "--label-col", "label", "--top-k", "5", "--reps", "3", "--out", str(tmp_path)]
        assert main(args, console=console) == 0
        reps = pd.read_csv(tmp_path / "genes_screen_reps.csv")
        selection = pd.read_csv(tmp_path / "genes_screen_selection.csv")
        assert len(reps) == 3
        assert set(selection["feature"]) >= {"f0", "f1", "f2", "f3", "f4"}

    def test_missing_label(self, console, capsys, tmp_path):
        path = tmp_path / "genes.csv"
        path.write_text("a,b\n1,2\n3,4\n")
        assert main(["screen", "--data", str(path), "--label-col", "label", "--out", str(tmp_path)], console=console) == 2
        assert _error_line(capsys)["error"] == "data_error"
