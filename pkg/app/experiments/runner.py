"""
Monte-Carlo experiment runner

Every (grid point, repetition) pair is an independent task with its own seeded
train, test and split streams, so the output does not depend on how tasks are
scheduled across workers.
"""
import time
from dataclasses import dataclass
from enum import IntEnum
from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed

from app.core.config import get_settings
from app.core.errors import NpLdaError
from app.core.logging import get_logger
from app.core.numerics import SeedSpec
from app.experiments.config import ExperimentConfig, GridPoint
from app.experiments.methods import TrainingContext, method_registry
from app.experiments.records import AggregateRow, RepetitionRecord, aggregate
from app.ml.model import LdaModel, population_errors
from app.ml.sampling import LabeledSample, compute_stats, sample_gaussian, sample_student_t

logger = get_logger(__name__)


class SeedRole(IntEnum):
    TRAIN = 0
    TEST = 1
    SPLIT = 2


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: List[RepetitionRecord]
    aggregates: List[AggregateRow]


def repetition_seed(cfg: ExperimentConfig, grid_index: int, rep_index: int, role: SeedRole) -> SeedSpec:
    return SeedSpec(cfg.base_seed, 0).spawn(grid_index, rep_index, int(role))


def draw_sample(cfg: ExperimentConfig, model: LdaModel, n0: int, n1: int, seed: SeedSpec) -> LabeledSample:
    if cfg.distribution == "student_t":
        return sample_student_t(model, cfg.df, n0, n1, seed)
    return sample_gaussian(model, n0, n1, seed)


def run_repetition(cfg: ExperimentConfig, point: GridPoint, model: LdaModel, rep_index: int) -> List[RepetitionRecord]:
    """Train and evaluate every configured method on one repetition"""
    train = draw_sample(cfg, model, point.n0, point.n1, repetition_seed(cfg, point.index, rep_index, SeedRole.TRAIN))
    test = draw_sample(
        cfg, model, cfg.test_per_class, cfg.test_per_class, repetition_seed(cfg, point.index, rep_index, SeedRole.TEST)
    )

    stats, stats_error = None, None
    try:
        stats = compute_stats(train)
    except NpLdaError as exc:
        stats_error = exc

    ctx = TrainingContext(
        model=model,
        sample=train,
        stats=stats,
        stats_error=stats_error,
        levels=cfg.levels,
        split_seed=repetition_seed(cfg, point.index, rep_index, SeedRole.SPLIT),
        split_frac=cfg.split_frac,
    )

    records = []
    for method in cfg.methods:
        outcome = method_registry.train(method, ctx)
        record = RepetitionRecord(
            method=method,
            rep_index=rep_index,
            n0=point.n0,
            n1=point.n1,
            p=point.p,
            alpha=cfg.alpha,
            delta=cfg.delta,
            status=outcome.status,
            axis_value=point.axis_value,
        )
        if outcome.classifier is not None:
            clf = outcome.classifier
            record.threshold = clf.threshold
            record.type1_emp = float(np.mean(clf.predict(test.x0)))
            record.type2_emp = float(1.0 - np.mean(clf.predict(test.x1)))
            if cfg.distribution == "gaussian":
                try:
                    record.type1_pop, record.type2_pop = population_errors(model, clf)
                except NpLdaError as exc:
                    record.status = exc.code
        records.append(record)
    return records


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    """
    Run every grid point and repetition of a study

    Per-repetition failures are stored as record statuses; the sweep never stops
    on them. Records and aggregates are sorted, so results are identical for any
    number of workers.
    """
    settings = get_settings()
    workers = workers or settings.workers
    start = time.perf_counter()
    logger.info(
        "experiment_started",
        experiment=cfg.name,
        grid_points=cfg.grid_size,
        reps=cfg.reps,
        methods=list(cfg.methods),
        workers=workers,
    )

    records: List[RepetitionRecord] = []
    with Parallel(n_jobs=workers, backend=settings.parallel_backend) as parallel:
        for point in cfg.grid_points():
            model = cfg.build_model(point.p)
            batches = parallel(delayed(run_repetition)(cfg, point, model, rep) for rep in range(cfg.reps))
            point_records = [record for batch in batches for record in batch]
            failures = sum(not record.ok for record in point_records)
            logger.info(
                "grid_point_finished",
                experiment=cfg.name,
                n0=point.n0,
                n1=point.n1,
                p=point.p,
                not_ok=failures,
            )
            records.extend(point_records)

    records.sort(key=RepetitionRecord.sort_key)
    aggregates = aggregate(records, cfg.alpha)
    logger.info("experiment_finished", experiment=cfg.name, records=len(records), seconds=time.perf_counter() - start)
    return ExperimentResult(cfg, records, aggregates)
