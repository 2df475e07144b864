#!/usr/bin/env python
"""
Run the built-in simulation studies in order and write their CSVs

Usage: python scripts/run_builtin_examples.py [example ...] [--reps N]
With no example ids every built-in study runs.
"""
import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.core.config import get_settings  # noqa: E402
from app.core.errors import NpLdaError  # noqa: E402
from app.core.logging import get_logger, setup_logging  # noqa: E402
from app.experiments.config import BUILTIN_IDS, builtin_config  # noqa: E402
from app.experiments.io import write_csv  # noqa: E402
from app.experiments.runner import run_experiment  # noqa: E402

setup_logging()
logger = get_logger("run_builtin_examples")


def run_example(example_id: str, out_dir: Path, reps: int = None) -> bool:
    """Run one study; failures are logged and reported as False"""
    try:
        cfg = builtin_config(example_id)
        if reps is not None:
            cfg = cfg.model_copy(update={"reps": reps})
        start = time.perf_counter()
        result = run_experiment(cfg)
        write_csv(result.records, out_dir / f"{cfg.name}_records.csv", kind="records")
        write_csv(result.aggregates, out_dir / f"{cfg.name}_aggregates.csv", kind="aggregates")
        logger.info("example_completed", example=example_id, seconds=round(time.perf_counter() - start, 1))
        return True
    except NpLdaError as exc:
        logger.error("example_failed", example=example_id, error=exc.code, message=exc.message)
        return False


def main() -> bool:
    parser = argparse.ArgumentParser(description="run built-in NP-LDA simulation studies")
    parser.add_argument("examples", nargs="*", default=list(BUILTIN_IDS))
    parser.add_argument("--reps", type=int, help="override the repetitions of every study")
    parser.add_argument("--out", default=get_settings().output_dir)
    args = parser.parse_args()

    out_dir = Path(args.out)
    logger.info("examples_started", examples=args.examples, out=str(out_dir))
    failed = [example for example in args.examples if not run_example(example, out_dir, args.reps)]
    if failed:
        logger.error("examples_failed", examples=failed)
        return False
    logger.info("examples_finished", count=len(args.examples))
    return True


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
