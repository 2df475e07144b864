"""
Class-conditional data generation and the sample statistics every classifier uses
"""
import dataclasses
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.core.errors import DimensionMismatch, InsufficientSamples
from app.core.linalg import SpdMatrix, Vec, quadratic_form, spd_solve
from app.core.logging import get_logger
from app.core.numerics import SeedSpec, rng_stream
from app.ml.model import LdaModel

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Class 0 rows in x0, class 1 rows in x1"""

    x0: np.ndarray
    x1: np.ndarray

    def __post_init__(self):
        x0 = np.atleast_2d(np.asarray(self.x0, dtype=float))
        x1 = np.atleast_2d(np.asarray(self.x1, dtype=float))
        if x0.ndim != 2 or x1.ndim != 2 or x0.shape[1] != x1.shape[1]:
            raise DimensionMismatch("class matrices must share the feature dimension", x0=x0.shape, x1=x1.shape)
        if x0.shape[0] < 1 or x1.shape[0] < 1:
            raise InsufficientSamples("each class needs at least one observation", n0=x0.shape[0], n1=x1.shape[0])
        if not (np.all(np.isfinite(x0)) and np.all(np.isfinite(x1))):
            raise ValueError("sample has non-finite entries")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x1", x1)

    @property
    def n0(self) -> int:
        return self.x0.shape[0]

    @property
    def n1(self) -> int:
        return self.x1.shape[0]

    @property
    def n(self) -> int:
        return self.n0 + self.n1

    @property
    def p(self) -> int:
        return self.x0.shape[1]

    def shifted(self, offset: np.ndarray) -> "LabeledSample":
        return LabeledSample(self.x0 + offset, self.x1 + offset)


@dataclass(frozen=True, eq=False)
class SampleStats:
    """
    Pooled sample statistics of a LabeledSample

    ``signal`` is μ̂_dᵀΣ̂⁻¹μ̂_d. ``r`` is p/n unless overridden with ``with_ratio``.
    """

    mu0_hat: Vec
    mu1_hat: Vec
    mu_d_hat: Vec
    sigma_hat: SpdMatrix
    a_hat: Vec
    n0: int
    n1: int
    p: int
    r: float
    signal: float

    @property
    def n(self) -> int:
        return self.n0 + self.n1

    @property
    def v1_norm_sq(self) -> float:
        """‖v₁‖² = n/n0 + n/n1 = n²/(n0·n1)"""
        return self.n / self.n0 + self.n / self.n1

    @property
    def v1_dot_e0(self) -> float:
        return -np.sqrt(self.n / self.n0)

    def with_ratio(self, r: float) -> "SampleStats":
        """Copy with the aspect ratio replaced; used to check the r → 0 limit"""
        return dataclasses.replace(self, r=float(r))


def sample_gaussian(model: LdaModel, n0: int, n1: int, seed: SeedSpec) -> LabeledSample:
    """Rows μᵃ + L·z with z standard normal and L the Cholesky factor of Σ"""
    rng = rng_stream(seed)
    lower = model.sigma.factor
    z0 = rng.standard_normal((n0, model.p))
    z1 = rng.standard_normal((n1, model.p))
    return LabeledSample(model.mu0 + z0 @ lower.T, model.mu1 + z1 @ lower.T)


def sample_student_t(model: LdaModel, df: float, n0: int, n1: int, seed: SeedSpec) -> LabeledSample:
    """
    Multivariate t rows μᵃ + L·z·√(df/χ²_df), Σ taken as the scale matrix

    The covariance of each class is therefore Σ·df/(df−2) for df > 2.
    """
    if not df > 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    rng = rng_stream(seed)
    lower = model.sigma.factor

    def draw(mean: Vec, count: int) -> np.ndarray:
        z = rng.standard_normal((count, model.p))
        mix = np.sqrt(df / rng.chisquare(df, size=count))
        return mean + (z @ lower.T) * mix[:, None]

    x0 = draw(model.mu0, n0)
    x1 = draw(model.mu1, n1)
    return LabeledSample(x0, x1)


def compute_stats(sample: LabeledSample) -> SampleStats:
    """
    Class means, pooled covariance (divisor n0+n1−2) and the LDA direction â = Σ̂⁻¹μ̂_d

    Raises:
        InsufficientSamples: when a class has fewer than 2 rows or n−2 < p
        NotPositiveDefinite: when the pooled covariance is singular
    """
    n0, n1, p = sample.n0, sample.n1, sample.p
    if n0 < 2 or n1 < 2:
        raise InsufficientSamples("each class needs at least two observations", n0=n0, n1=n1)
    if n0 + n1 - 2 < p:
        raise InsufficientSamples("pooled covariance is singular when n - 2 < p", n=n0 + n1, p=p)

    mu0_hat = sample.x0.mean(axis=0)
    mu1_hat = sample.x1.mean(axis=0)
    centered0 = sample.x0 - mu0_hat
    centered1 = sample.x1 - mu1_hat
    scatter = centered0.T @ centered0 + centered1.T @ centered1
    sigma_hat = SpdMatrix(scatter / (n0 + n1 - 2))

    mu_d_hat = mu1_hat - mu0_hat
    a_hat = spd_solve(sigma_hat, mu_d_hat)
    signal = float(mu_d_hat @ a_hat)

    return SampleStats(
        mu0_hat=mu0_hat,
        mu1_hat=mu1_hat,
        mu_d_hat=mu_d_hat,
        sigma_hat=sigma_hat,
        a_hat=a_hat,
        n0=n0,
        n1=n1,
        p=p,
        r=p / (n0 + n1),
        signal=signal,
    )


def signal_from_quadratic_form(stats: SampleStats) -> float:
    """âᵀΣ̂â, equal to ``stats.signal`` up to roundoff"""
    return quadratic_form(stats.a_hat, stats.sigma_hat, stats.a_hat)


def representation_vectors(n0: int, n1: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Explicit length-n vectors e0, e1 and v1 of the mean representation

    e_a is the normalized indicator of class a; v1 stacks −√n/n0 over the class 0
    block and √n/n1 over the class 1 block, so μ̂_d − μ_d is a linear image of v1.
    """
    n = n0 + n1
    e0 = np.concatenate([np.full(n0, 1.0 / np.sqrt(n0)), np.zeros(n1)])
    e1 = np.concatenate([np.zeros(n0), np.full(n1, 1.0 / np.sqrt(n1))])
    v1 = np.concatenate([np.full(n0, -np.sqrt(n) / n0), np.full(n1, np.sqrt(n) / n1)])
    return e0, e1, v1
