"""
Feature screening and repeated-split evaluation for tabular two-class data

Each repetition splits both classes separately, ranks features by a pooled
two-sample t-test on the training rows only, trains eLDA on the top features and
measures empirical errors on the held-out rows.
"""
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from app.core.errors import DataError, DimensionMismatch, InsufficientSamples, NpLdaError, error_code
from app.core.logging import get_logger
from app.core.numerics import SeedSpec, rng_stream
from app.ml.classifiers import NpLevels, elda_train
from app.ml.sampling import LabeledSample, compute_stats

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class TabularDataset:
    """Feature matrix with 0/1 labels"""

    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...]

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels).astype(np.int8)
        if features.ndim != 2 or labels.shape != (features.shape[0],):
            raise DimensionMismatch("labels must match the feature rows", features=features.shape, labels=labels.shape)
        if len(self.feature_names) != features.shape[1]:
            raise DimensionMismatch("one name per feature column is required")
        if not np.all(np.isin(labels, (0, 1))):
            raise DataError("labels must be 0 or 1")
        if not np.all(np.isfinite(features)):
            raise DataError("features contain missing or non-finite values")
        if not (np.any(labels == 0) and np.any(labels == 1)):
            raise DataError("both classes must be present")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_rows(self, label: int) -> np.ndarray:
        return self.features[self.labels == label]


def load_tabular_csv(path: Union[str, Path], label_col: str) -> TabularDataset:
    """
    Read a CSV with a header row, one 0/1 label column and numeric features

    Raises:
        DataError: on a missing label column, non-numeric cells or missing values
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read {path}: {exc}", path=str(path)) from exc
    if label_col not in frame.columns:
        raise DataError(f"label column {label_col!r} not found", path=str(path))

    features = frame.drop(columns=[label_col])
    try:
        features = features.apply(pd.to_numeric, errors="raise")
        labels = pd.to_numeric(frame[label_col], errors="raise")
    except (ValueError, TypeError) as exc:
        raise DataError(f"non-numeric value in {path}: {exc}", path=str(path)) from exc
    if features.isna().any().any() or labels.isna().any():
        raise DataError("missing values are not supported", path=str(path))

    dataset = TabularDataset(features.to_numpy(dtype=float), labels.to_numpy(), tuple(map(str, features.columns)))
    logger.info("dataset_loaded", path=str(path), rows=len(frame), features=dataset.n_features)
    return dataset


def _pooled_t(x0: np.ndarray, x1: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Column-wise pooled two-sample t statistics and two-sided p-values"""
    n0, n1 = x0.shape[0], x1.shape[0]
    if n0 < 2 or n1 < 2:
        raise InsufficientSamples("t-test needs two observations per class", n0=n0, n1=n1)
    degenerate = (np.ptp(x0, axis=0) == 0) & (np.ptp(x1, axis=0) == 0)
    with np.errstate(divide="ignore", invalid="ignore"), warnings.catch_warnings():
        # scipy flags constant columns as catastrophic cancellation
        warnings.simplefilter("ignore", RuntimeWarning)
        result = stats.ttest_ind(x0, x1, axis=0, equal_var=True)
    t_stat = np.where(degenerate, 0.0, np.nan_to_num(np.atleast_1d(result.statistic), nan=0.0))
    p_value = np.where(degenerate, 1.0, np.nan_to_num(np.atleast_1d(result.pvalue), nan=1.0))
    if np.any(degenerate):
        logger.warning("zero_pooled_variance", features=int(degenerate.sum()))
    return t_stat, p_value


def two_sample_t(dataset: TabularDataset, feature_index: int) -> Tuple[float, float]:
    """Pooled-variance t statistic (class 0 minus class 1) and its two-sided p-value"""
    column = dataset.features[:, [feature_index]]
    t_stat, p_value = _pooled_t(column[dataset.labels == 0], column[dataset.labels == 1])
    return float(t_stat[0]), float(p_value[0])


def screen_top_k(dataset: TabularDataset, k: int) -> List[int]:
    """Indices of the k smallest p-values; ties go to the smaller index"""
    if not 1 <= k <= dataset.n_features:
        raise DimensionMismatch(f"top_k must lie in [1, {dataset.n_features}], got {k}")
    _, p_values = _pooled_t(dataset.class_rows(0), dataset.class_rows(1))
    return [int(i) for i in np.argsort(p_values, kind="stable")[:k]]


class ScreenPlan(BaseModel):
    """Repeated-split protocol for the screening evaluation"""

    model_config = ConfigDict(extra="forbid")

    top_k: int = Field(default=40, ge=1)
    train_frac: float = Field(default=0.7, gt=0.0, lt=1.0)
    reps: int = Field(default=100, ge=1)
    levels: NpLevels = NpLevels(alpha=0.05, delta=0.1)
    base_seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)


class ScreenRepetition(BaseModel):
    rep_index: int
    status: str
    type1_emp: Optional[float] = None
    type2_emp: Optional[float] = None
    selected: List[int] = []


class ScreenReport(BaseModel):
    """Aggregates over the repetitions that trained successfully"""

    reps: int
    ok_reps: int
    alpha: float
    delta: float
    mean_type1: Optional[float]
    mean_type2: Optional[float]
    violation_rate: Optional[float]
    repetitions: List[ScreenRepetition]

    def selection_counts(self, n_features: int) -> np.ndarray:
        counts = np.zeros(n_features, dtype=int)
        for rep in self.repetitions:
            counts[rep.selected] += 1
        return counts


def train_count(n: int, train_frac: float) -> int:
    return int(math.floor(train_frac * n + 0.5))


def stratified_split(labels: np.ndarray, train_frac: float, seed: SeedSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Training and test row indices, splitting each class separately"""
    rng = rng_stream(seed)
    train_parts, test_parts = [], []
    for label in (0, 1):
        rows = np.flatnonzero(labels == label)
        rows = rows[rng.permutation(rows.shape[0])]
        cut = train_count(rows.shape[0], train_frac)
        train_parts.append(rows[:cut])
        test_parts.append(rows[cut:])
    return np.sort(np.concatenate(train_parts)), np.sort(np.concatenate(test_parts))


def _screen_rep(dataset: TabularDataset, plan: ScreenPlan, rep: int) -> ScreenRepetition:
    train_idx, test_idx = stratified_split(dataset.labels, plan.train_frac, SeedSpec(plan.base_seed, rep))
    train = TabularDataset(dataset.features[train_idx], dataset.labels[train_idx], dataset.feature_names)
    selected = screen_top_k(train, plan.top_k)

    sample = LabeledSample(train.class_rows(0)[:, selected], train.class_rows(1)[:, selected])
    try:
        clf = elda_train(compute_stats(sample), plan.levels)
    except NpLdaError as exc:
        logger.debug("screen_rep_failed", rep=rep, error=exc.code)
        return ScreenRepetition(rep_index=rep, status=error_code(exc), selected=selected)

    test_x = dataset.features[test_idx][:, selected]
    test_y = dataset.labels[test_idx]
    predicted = clf.predict(test_x)
    return ScreenRepetition(
        rep_index=rep,
        status="ok",
        type1_emp=float(predicted[test_y == 0].mean()),
        type2_emp=float(1.0 - predicted[test_y == 1].mean()),
        selected=selected,
    )


def run_screen_eval(dataset: TabularDataset, plan: ScreenPlan) -> ScreenReport:
    """
    Repeated stratified splits with train-only screening and eLDA

    Raises:
        InsufficientSamples: when the training classes cannot support top_k features
    """
    n0 = int((dataset.labels == 0).sum())
    n1 = int((dataset.labels == 1).sum())
    n_train = train_count(n0, plan.train_frac) + train_count(n1, plan.train_frac)
    if min(n0 - train_count(n0, plan.train_frac), n1 - train_count(n1, plan.train_frac)) < 1:
        raise InsufficientSamples("every class needs at least one test row", n0=n0, n1=n1)
    if n_train - 2 <= plan.top_k:
        raise InsufficientSamples(
            f"training size {n_train} cannot support {plan.top_k} features", n_train=n_train, top_k=plan.top_k
        )
    if plan.top_k > dataset.n_features:
        raise DimensionMismatch(f"top_k {plan.top_k} exceeds the {dataset.n_features} available features")

    logger.info("screen_eval_started", reps=plan.reps, top_k=plan.top_k, features=dataset.n_features)
    reps = Parallel(n_jobs=plan.workers)(delayed(_screen_rep)(dataset, plan, rep) for rep in range(plan.reps))

    ok = [rep for rep in reps if rep.status == "ok"]
    type1 = np.array([rep.type1_emp for rep in ok])
    type2 = np.array([rep.type2_emp for rep in ok])
    report = ScreenReport(
        reps=plan.reps,
        ok_reps=len(ok),
        alpha=plan.levels.alpha,
        delta=plan.levels.delta,
        mean_type1=float(type1.mean()) if ok else None,
        mean_type2=float(type2.mean()) if ok else None,
        violation_rate=float((type1 > plan.levels.alpha).mean()) if ok else None,
        repetitions=list(reps),
    )
    logger.info("screen_eval_finished", ok_reps=report.ok_reps, mean_type1=report.mean_type1)
    return report


def make_synthetic_dataset(
    n_features: int,
    informative: int,
    n0: int,
    n1: int,
    shift: float,
    seed: SeedSpec,
) -> TabularDataset:
    """Independent standard normal features; class 1 is shifted by ``shift`` on the first ``informative``"""
    if not 0 <= informative <= n_features:
        raise DimensionMismatch(f"informative must lie in [0, {n_features}], got {informative}")
    rng = rng_stream(seed)
    x0 = rng.standard_normal((n0, n_features))
    x1 = rng.standard_normal((n1, n_features))
    x1[:, :informative] += shift
    names = tuple(f"f{i}" for i in range(n_features))
    return TabularDataset(np.vstack([x0, x1]), np.r_[np.zeros(n0), np.ones(n1)], names)


def screen_report_frame(report: ScreenReport) -> pd.DataFrame:
    """Per-repetition rows for CSV output"""
    return pd.DataFrame(
        [
            {"rep_index": rep.rep_index, "status": rep.status, "type1_emp": rep.type1_emp, "type2_emp": rep.type2_emp}
            for rep in report.repetitions
        ],
        columns=["rep_index", "status", "type1_emp", "type2_emp"],
    )


def selected_feature_names(dataset: TabularDataset, indices: Sequence[int]) -> List[str]:
    return [dataset.feature_names[i] for i in indices]
