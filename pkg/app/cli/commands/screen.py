"""
screen: repeated-split screening evaluation of eLDA on a tabular CSV
"""
import argparse
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import Field
from rich.table import Table

from app.cli.base import BaseCommand, CommandRequest, command_registry
from app.core.output import write_frame
from app.ml.classifiers import NpLevels
from app.ml.screening import (
    ScreenPlan,
    load_tabular_csv,
    run_screen_eval,
    screen_report_frame,
    selected_feature_names,
)


class ScreenRequest(CommandRequest):
    data: Path
    label_col: str
    top_k: int = Field(default=40, ge=1)
    alpha: float = 0.05
    delta: float = 0.1
    reps: int = Field(default=100, ge=1)
    train_frac: float = Field(default=0.7, gt=0.0, lt=1.0)
    seed: Optional[int] = Field(default=None, ge=0)
    workers: Optional[int] = Field(default=None, ge=1)
    out: Optional[Path] = None


@command_registry.register
class ScreenCommand(BaseCommand):
    name = "screen"
    help = "t-test screening plus eLDA over repeated stratified splits"
    request_model = ScreenRequest

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument("--data", required=True, help="CSV with a header row")
        parser.add_argument("--label-col", dest="label_col", required=True)
        parser.add_argument("--top-k", dest="top_k", type=int)
        parser.add_argument("--alpha", type=float)
        parser.add_argument("--delta", type=float)
        parser.add_argument("--reps", type=int)
        parser.add_argument("--train-frac", dest="train_frac", type=float)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--workers", type=int)
        parser.add_argument("--out", help="output directory (default: OUTPUT_DIR)")

    def execute(self, request: ScreenRequest) -> int:
        dataset = load_tabular_csv(request.data, request.label_col)
        plan = ScreenPlan(
            top_k=request.top_k,
            train_frac=request.train_frac,
            reps=request.reps,
            levels=NpLevels(alpha=request.alpha, delta=request.delta),
            base_seed=self.settings.base_seed if request.seed is None else request.seed,
            workers=request.workers or self.settings.workers,
        )
        report = run_screen_eval(dataset, plan)

        out_dir = request.out or Path(self.settings.output_dir)
        stem = request.data.stem
        write_frame(screen_report_frame(report), out_dir / f"{stem}_screen_reps.csv")
        counts = report.selection_counts(dataset.n_features)
        order = np.argsort(-counts, kind="stable")
        selection = pd.DataFrame(
            {
                "feature": selected_feature_names(dataset, order),
                "times_selected": counts[order],
            }
        )
        write_frame(selection[selection["times_selected"] > 0], out_dir / f"{stem}_screen_selection.csv")

        def fmt(value: Optional[float]) -> str:
            return "-" if value is None else f"{value:.4f}"

        table = Table(title=f"screening eLDA, top {plan.top_k}, {report.ok_reps}/{report.reps} reps ok")
        table.add_column("quantity")
        table.add_column("value", justify="right")
        table.add_row("mean type I", fmt(report.mean_type1))
        table.add_row("mean type II", fmt(report.mean_type2))
        table.add_row("observed violation rate", fmt(report.violation_rate))
        self.console.print(table)
        return 0
