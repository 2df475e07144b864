"""
simulate: run a built-in or file-based simulation study and write its CSVs
"""
import argparse
from pathlib import Path
from typing import Optional

from pydantic import Field, model_validator
from rich.table import Table

from app.cli.base import BaseCommand, CommandRequest, command_registry
from app.experiments.config import BUILTIN_IDS, ExperimentConfig, builtin_config, load_config
from app.experiments.io import write_csv
from app.experiments.runner import ExperimentResult, run_experiment


class SimulateRequest(CommandRequest):
    config: Optional[Path] = None
    example: Optional[str] = None
    out: Optional[Path] = None
    workers: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0)
    reps: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def one_source(self):
        if (self.config is None) == (self.example is None):
            raise ValueError("pass exactly one of --config and --example")
        return self


def resolve_config(request: SimulateRequest) -> ExperimentConfig:
    cfg = load_config(request.config) if request.config is not None else builtin_config(request.example)
    overrides = {}
    if request.seed is not None:
        overrides["base_seed"] = request.seed
    if request.reps is not None:
        overrides["reps"] = request.reps
    if overrides:
        cfg = ExperimentConfig.model_validate({**cfg.model_dump(), **overrides})
    return cfg


def aggregates_table(result: ExperimentResult) -> Table:
    table = Table(title=f"{result.config.name} (axis {result.config.axis})")
    for column in ("method", result.config.axis, "mean type I", "mean type II", "violation", "feasible"):
        table.add_column(column, justify="right" if column != "method" else "left")

    def fmt(value: Optional[float]) -> str:
        return "-" if value is None else f"{value:.4f}"

    for row in result.aggregates:
        table.add_row(
            row.method,
            str(row.axis_value),
            fmt(row.mean_type1),
            fmt(row.mean_type2),
            fmt(row.violation_rate),
            fmt(row.feasible_fraction),
        )
    return table


@command_registry.register
class SimulateCommand(BaseCommand):
    name = "simulate"
    help = "run a simulation study and write records and aggregates as CSV"
    request_model = SimulateRequest

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument("--config", help="JSON experiment description")
        source.add_argument("--example", help=f"built-in study: {', '.join(BUILTIN_IDS)}")
        parser.add_argument("--out", help="output directory (default: OUTPUT_DIR)")
        parser.add_argument("--workers", type=int, help="parallel workers (default: WORKERS)")
        parser.add_argument("--seed", type=int, help="override the base seed")
        parser.add_argument("--reps", type=int, help="override the number of repetitions")

    def execute(self, request: SimulateRequest) -> int:
        cfg = resolve_config(request)
        out_dir = request.out or Path(self.settings.output_dir)
        result = run_experiment(cfg, workers=request.workers)

        records_path = write_csv(result.records, out_dir / f"{cfg.name}_records.csv", kind="records")
        aggregates_path = write_csv(result.aggregates, out_dir / f"{cfg.name}_aggregates.csv", kind="aggregates")

        self.console.print(aggregates_table(result))
        self.console.print(f"records: {records_path}")
        self.console.print(f"aggregates: {aggregates_path}")
        return 0
