"""
Neyman-Pearson classifiers for the LDA model

eLDA and feLDA keep the LDA direction â = Σ̂⁻¹μ̂_d and choose the threshold from
the asymptotic distribution of the estimated oracle threshold, so no sample
is held out. The NP umbrella baseline instead holds out part of class 0 and
thresholds a score at an order statistic of the held-out scores.
"""
import math
from dataclasses import dataclass
from typing import Optional, Protocol, Union, runtime_checkable

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, field_validator

from app.core.errors import DimensionMismatch, InsufficientSamples, NonPositiveSignal
from app.core.logging import get_logger
from app.core.numerics import (
    SeedSpec,
    binom_upper_tail,
    check_level,
    log_ratio_ceiling,
    rng_stream,
    std_normal_quantile,
)
from app.ml.model import LinearClassifier
from app.ml.sampling import LabeledSample, SampleStats, compute_stats

logger = get_logger(__name__)


class NpLevels(BaseModel):
    """Type I level alpha and violation rate target delta"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float
    delta: float

    @field_validator("alpha", "delta")
    @classmethod
    def strictly_inside_unit_interval(cls, v: float, info) -> float:
        return check_level(v, info.field_name)


@dataclass(frozen=True)
class VarianceBreakdown:
    """Terms of the eLDA threshold variance V̂ = V̂₁ + V̂₂ + V̂₃"""

    v1: float
    v2: float
    v3: float
    c_const: float
    phi_alpha: float
    s_term: float

    @property
    def v_total(self) -> float:
        return self.v1 + self.v2 + self.v3


def _s_term(stats: SampleStats) -> float:
    """S = (1−r)·signal − r·‖v₁‖²"""
    return (1.0 - stats.r) * stats.signal - stats.r * stats.v1_norm_sq


def elda_variance(stats: SampleStats, alpha: float) -> VarianceBreakdown:
    """
    Variance terms of the eLDA threshold fluctuation

    Raises:
        NonPositiveSignal: when signal ≤ 0 or S ≤ 0
    """
    alpha = check_level(alpha, "alpha")
    if not stats.signal > 0:
        raise NonPositiveSignal("sample signal must be positive", signal=stats.signal)
    s_term = _s_term(stats)
    if not s_term > 0:
        raise NonPositiveSignal(
            "aspect-ratio corrected signal is not positive", s_term=s_term, r=stats.r, signal=stats.signal
        )

    r = stats.r
    n, n0, n1 = stats.n, stats.n0, stats.n1
    v1sq = stats.v1_norm_sq
    v1 = math.sqrt(v1sq)
    phi_a = std_normal_quantile(1.0 - alpha)
    c_const = (1.0 - r) / (2.0 * math.sqrt(stats.signal))
    c_phi = c_const * phi_a
    cross = 2.0 * c_phi * v1 * math.sqrt(n1 / n0)

    var1 = s_term * c_phi**2 * 2.0 * (1.0 + r) / (1.0 - r) ** 7
    var2 = (
        c_phi**2 * v1sq * 4.0 * r * (1.0 + r) / (1.0 - r) ** 7
        + n / (n0 * (1.0 - r) ** 3)
        + cross * 2.0 * r / (1.0 - r) ** 5
    )
    var3 = (v1sq / s_term) * (
        c_phi**2 * v1sq * 2.0 * r**2 * (1.0 + r) / (1.0 - r) ** 7
        + (n + n1) * r / (n0 * (1.0 - r) ** 3)
        + cross * 2.0 * r**2 / (1.0 - r) ** 5
    )
    return VarianceBreakdown(var1, var2, var3, c_const, phi_a, s_term)


def elda_f_hat(stats: SampleStats, alpha: float) -> float:
    """Bias-corrected plug-in oracle threshold F̂"""
    alpha = check_level(alpha, "alpha")
    r = stats.r
    phi_a = std_normal_quantile(1.0 - alpha)
    return (
        math.sqrt(max(stats.signal, 0.0)) / (1.0 - r) * phi_a
        + float(stats.a_hat @ stats.mu0_hat)
        - math.sqrt(stats.n / stats.n0) * r / (1.0 - r) * stats.v1_dot_e0
    )


def elda_train(stats: SampleStats, levels: NpLevels) -> LinearClassifier:
    """
    eLDA: threshold F̂ + √(S·V̂/n)·Φ⁻¹(1−δ) on the direction â

    Raises:
        NonPositiveSignal: when S ≤ 0
    """
    breakdown = elda_variance(stats, levels.alpha)
    margin = math.sqrt(breakdown.s_term * breakdown.v_total / stats.n) * std_normal_quantile(1.0 - levels.delta)
    return LinearClassifier(stats.a_hat, elda_f_hat(stats, levels.alpha) + margin, method="elda")


def felda_train(stats: SampleStats, levels: NpLevels) -> LinearClassifier:
    """feLDA: the fixed-dimension simplification of eLDA"""
    if not stats.signal > 0:
        raise NonPositiveSignal("sample signal must be positive", signal=stats.signal)
    phi_a = std_normal_quantile(1.0 - levels.alpha)
    root_signal = math.sqrt(stats.signal)
    f_tilde = root_signal * phi_a + float(stats.a_hat @ stats.mu0_hat)
    v_tilde = phi_a**2 / 2.0 + stats.n / stats.n0
    threshold = f_tilde + root_signal * math.sqrt(v_tilde / stats.n) * std_normal_quantile(1.0 - levels.delta)
    return LinearClassifier(stats.a_hat, threshold, method="felda")


# NP umbrella algorithm


def umbrella_min_size(alpha: float, delta: float) -> int:
    """Smallest m with (1−α)^m ≤ δ"""
    alpha = check_level(alpha, "alpha")
    delta = check_level(delta, "delta")
    m = max(log_ratio_ceiling(math.log(delta), math.log1p(-alpha)), 1)
    # guard the ceiling against roundoff in the logarithms
    while m > 1 and (1.0 - alpha) ** (m - 1) <= delta:
        m -= 1
    while (1.0 - alpha) ** m > delta:
        m += 1
    return m


def umbrella_order(m: int, levels: NpLevels) -> Optional[int]:
    """Minimal k in [1, m] with ν(k) ≤ δ, or None when no order qualifies"""
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    q = 1.0 - levels.alpha
    if binom_upper_tail(m, m, q) > levels.delta:
        return None
    # ν is nonincreasing in k
    lo, hi = 1, m
    while lo < hi:
        mid = (lo + hi) // 2
        if binom_upper_tail(m, mid, q) <= levels.delta:
            hi = mid
        else:
            lo = mid + 1
    return lo


def umbrella_violation_bound(m: int, k: int, alpha: float) -> float:
    """Probability that the k-th order statistic threshold violates level alpha"""
    return binom_upper_tail(m, k, 1.0 - check_level(alpha, "alpha"))


@runtime_checkable
class Scorer(Protocol):
    """Fits a scoring function on a training sample"""

    name: str

    def fit(self, sample: LabeledSample) -> "FittedScore":
        ...


@runtime_checkable
class FittedScore(Protocol):
    def score(self, x: ArrayLike) -> np.ndarray:
        ...


@dataclass(frozen=True, eq=False)
class LinearScore:
    """Score wᵀx"""

    direction: np.ndarray

    def score(self, x: ArrayLike) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1] != self.direction.shape[0]:
            raise DimensionMismatch(
                f"points have dimension {arr.shape[-1]}, score expects {self.direction.shape[0]}"
            )
        return arr @ self.direction


class LdaScorer:
    """Default umbrella scorer: the LDA direction of the training portion"""

    name = "lda"

    def fit(self, sample: LabeledSample) -> LinearScore:
        return LinearScore(compute_stats(sample).a_hat)


@dataclass(frozen=True, eq=False)
class ScoredClassifier:
    """Predicts class 1 iff score(x) > threshold"""

    scorer: FittedScore
    threshold: float
    order: int
    left_out: int
    method: str = "umbrella"

    def decision(self, x: ArrayLike) -> np.ndarray:
        return self.scorer.score(x)

    def predict(self, x: ArrayLike) -> np.ndarray:
        return (self.decision(x) > self.threshold).astype(np.int8)

    def to_linear(self) -> Optional[LinearClassifier]:
        """Equivalent LinearClassifier when the score is linear"""
        if isinstance(self.scorer, LinearScore):
            return LinearClassifier(self.scorer.direction, self.threshold, method=self.method)
        return None


def left_out_count(n0: int, split_frac: float) -> int:
    """Held-out class 0 count, split_frac·n0 rounded half up"""
    return int(math.floor(split_frac * n0 + 0.5))


def umbrella_train(
    sample: LabeledSample,
    levels: NpLevels,
    seed: SeedSpec,
    split_frac: float = 0.5,
    scorer: Optional[Scorer] = None,
) -> ScoredClassifier:
    """
    NP umbrella algorithm on a pluggable scorer

    Class 0 is split at random; the scorer is fit on the remaining class 0 rows
    plus all of class 1, and the threshold is the k*-th smallest held-out score.

    Raises:
        InsufficientSamples: when the held-out count is below umbrella_min_size
    """
    if not 0.0 < split_frac < 1.0:
        raise ValueError(f"split_frac must lie in (0, 1), got {split_frac}")
    scorer = scorer or LdaScorer()
    m = left_out_count(sample.n0, split_frac)
    min_size = umbrella_min_size(levels.alpha, levels.delta)
    if m < min_size:
        raise InsufficientSamples(
            f"umbrella needs {min_size} held-out class 0 points, got {m}", left_out=m, min_size=min_size
        )
    order = umbrella_order(m, levels)
    if order is None:
        raise InsufficientSamples("no order statistic meets the violation target", left_out=m)

    permutation = rng_stream(seed).permutation(sample.n0)
    held_out = sample.x0[permutation[:m]]
    training = LabeledSample(sample.x0[permutation[m:]], sample.x1)

    fitted = scorer.fit(training)
    scores = np.sort(fitted.score(held_out), kind="stable")
    threshold = float(scores[order - 1])
    logger.debug("umbrella_trained", left_out=m, order=order, threshold=threshold)
    return ScoredClassifier(fitted, threshold, order=order, left_out=m, method=f"umbrella_{scorer.name}")


def predict(clf: Union[LinearClassifier, ScoredClassifier], x: ArrayLike) -> Union[int, np.ndarray]:
    """Class labels; a scalar for a single point"""
    labels = clf.predict(x)
    return int(labels) if np.ndim(labels) == 0 else labels
