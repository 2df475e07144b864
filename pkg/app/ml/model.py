"""
Population LDA model, the NP oracle and closed-form population errors

Two Gaussian classes N(μ⁰, Σ) and N(μ¹, Σ). A linear classifier predicts
class 1 when wᵀx > c; under the model its errors are Gaussian tail
probabilities of the projected means.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np
from numpy.typing import ArrayLike

from app.core.errors import DimensionMismatch, InvalidLevel, NonPositiveSignal
from app.core.linalg import SpdMatrix, Vec, ar1_matrix, as_vec, quadratic_form, spd_solve
from app.core.logging import get_logger
from app.core.numerics import check_level, std_normal_cdf, std_normal_quantile

logger = get_logger(__name__)

DEGENERATE_DELTA = 1e-6


@dataclass(frozen=True, eq=False)
class LdaModel:
    """Population parameters (μ⁰, μ¹, Σ) of the two-class LDA model"""

    mu0: Vec
    mu1: Vec
    sigma: SpdMatrix

    def __post_init__(self):
        if not isinstance(self.sigma, SpdMatrix):
            object.__setattr__(self, "sigma", SpdMatrix(self.sigma))
        object.__setattr__(self, "mu0", as_vec(self.mu0, self.sigma.dim, "mu0"))
        object.__setattr__(self, "mu1", as_vec(self.mu1, self.sigma.dim, "mu1"))
        if self.delta_d < DEGENERATE_DELTA:
            logger.warning("degenerate_mahalanobis_distance", delta_d=self.delta_d, p=self.p)

    @property
    def p(self) -> int:
        return self.sigma.dim

    @cached_property
    def mu_d(self) -> Vec:
        return self.mu1 - self.mu0

    @cached_property
    def bayes_direction(self) -> Vec:
        """Σ⁻¹μ_d"""
        return spd_solve(self.sigma, self.mu_d)

    @cached_property
    def delta_d(self) -> float:
        """Mahalanobis distance μ_dᵀΣ⁻¹μ_d"""
        return max(float(self.mu_d @ self.bayes_direction), 0.0)


@dataclass(frozen=True, eq=False)
class LinearClassifier:
    """Predicts class 1 iff directionᵀx > threshold"""

    direction: Vec
    threshold: float
    method: str = field(default="linear", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "direction", as_vec(self.direction, name="direction"))
        object.__setattr__(self, "threshold", float(self.threshold))
        if not np.any(self.direction):
            logger.warning("degenerate_direction", method=self.method, p=self.direction.shape[0])

    @property
    def p(self) -> int:
        return self.direction.shape[0]

    def decision(self, x: ArrayLike) -> np.ndarray:
        """Scores directionᵀx for a single point or the rows of a matrix"""
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1] != self.p:
            raise DimensionMismatch(f"points have dimension {arr.shape[-1]}, classifier expects {self.p}")
        return arr @ self.direction

    def predict(self, x: ArrayLike) -> np.ndarray:
        """Labels in {0, 1}; equality with the threshold predicts 0"""
        return (self.decision(x) > self.threshold).astype(np.int8)


class PopulationErrors(NamedTuple):
    type1: float
    type2: float


def oracle_classifier(model: LdaModel, alpha: float) -> LinearClassifier:
    """
    Level-alpha NP oracle under the population model

    Args:
        model: population parameters
        alpha: type I error level in (0, 1)

    Returns:
        Classifier with direction Σ⁻¹μ_d and threshold √Δ_d·Φ⁻¹(1−α) + (Σ⁻¹μ_d)ᵀμ⁰
    """
    alpha = check_level(alpha, "alpha")
    direction = model.bayes_direction
    threshold = np.sqrt(model.delta_d) * std_normal_quantile(1.0 - alpha) + float(direction @ model.mu0)
    return LinearClassifier(direction, threshold, method="oracle")


def population_errors(model: LdaModel, clf: LinearClassifier) -> PopulationErrors:
    """Exact Gaussian type I and type II errors of 1(wᵀx > c)"""
    spread_sq = quadratic_form(clf.direction, model.sigma, clf.direction)
    if not spread_sq > 0:
        raise NonPositiveSignal("classifier direction has zero variance under the model", w_sigma_w=spread_sq)
    spread = np.sqrt(spread_sq)
    type1 = std_normal_cdf((float(clf.direction @ model.mu0) - clf.threshold) / spread)
    type2 = std_normal_cdf((clf.threshold - float(clf.direction @ model.mu1)) / spread)
    return PopulationErrors(type1, type2)


def oracle_type2(model: LdaModel, alpha: float) -> float:
    """Φ(Φ⁻¹(1−α) − √Δ_d)"""
    alpha = check_level(alpha, "alpha")
    return std_normal_cdf(std_normal_quantile(1.0 - alpha) - np.sqrt(model.delta_d))


def calibrate_flat_beta(p: int, rho: float, alpha: float, target_type2: float) -> float:
    """
    Scale C_p such that β = C_p·1_p gives oracle type II error target_type2

    Raises:
        InvalidLevel: when target_type2 is outside (0, 1−alpha]
    """
    alpha = check_level(alpha, "alpha")
    target_type2 = check_level(target_type2, "target_type2")
    if target_type2 > 1.0 - alpha:
        raise InvalidLevel(
            f"target type II error {target_type2} is unreachable at alpha={alpha} (must not exceed {1.0 - alpha})",
            alpha=alpha,
            target_type2=target_type2,
        )
    root_delta = std_normal_quantile(1.0 - alpha) - std_normal_quantile(target_type2)
    scale = flat_beta_scale(p, rho, max(root_delta, 0.0) ** 2)
    if scale == 0.0:
        logger.warning("degenerate_calibration", p=p, alpha=alpha, target_type2=target_type2)
    return scale


def flat_beta_scale(p: int, rho: float, delta_d: float) -> float:
    """Scale C with Mahalanobis distance C²·1ᵀΣ1 = delta_d under the AR(1) Σ"""
    if delta_d < 0:
        raise ValueError(f"Mahalanobis distance must be non-negative, got {delta_d}")
    ones = np.ones(p)
    return float(np.sqrt(delta_d / quadratic_form(ones, ar1_matrix(p, rho), ones)))


def beta_to_mu_d(beta: ArrayLike, sigma: SpdMatrix) -> Vec:
    """μ_d = Σβ"""
    return sigma.matvec(as_vec(beta, sigma.dim, "beta"))


def build_flat_beta_model(p: int, rho: float, scale: float, p0: Optional[int] = None) -> LdaModel:
    """AR(1) model with μ⁰ = 0 and β = scale·(1_{p0}, 0_{p−p0})"""
    p0 = p if p0 is None else min(p0, p)
    sigma = ar1_matrix(p, rho)
    beta = np.zeros(p)
    beta[:p0] = scale
    return LdaModel(mu0=np.zeros(p), mu1=beta_to_mu_d(beta, sigma), sigma=sigma)
