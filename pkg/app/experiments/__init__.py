"""
Declarative simulation studies: configs, the runner and CSV output
"""

from app.experiments.config import ExperimentConfig, builtin_config, load_config
from app.experiments.io import read_aggregates, write_csv
from app.experiments.records import AggregateRow, RepetitionRecord, aggregate
from app.experiments.runner import ExperimentResult, run_experiment

__all__ = [
    "ExperimentConfig",
    "builtin_config",
    "load_config",
    "read_aggregates",
    "write_csv",
    "AggregateRow",
    "RepetitionRecord",
    "aggregate",
    "ExperimentResult",
    "run_experiment",
]
