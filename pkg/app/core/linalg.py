"""
Dense linear algebra for the NP-LDA Workbench

Vectors are 1-d float64 numpy arrays. ``SpdMatrix`` wraps a symmetric positive
definite matrix and caches its lower Cholesky factor; every solve goes through
that factor, and an explicit inverse is only formed by ``SpdMatrix.inverse``.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg as sla

from app.core.errors import DimensionMismatch, NotPositiveDefinite
from app.core.logging import get_logger

logger = get_logger(__name__)

Vec = NDArray[np.float64]

ASYMMETRY_WARN_TOL = 1e-8


def as_vec(values: ArrayLike, dim: Optional[int] = None, name: str = "vector") -> Vec:
    """Coerce to a finite 1-d float array, optionally checking its length"""
    vec = np.asarray(values, dtype=float)
    if vec.ndim == 0:
        vec = vec.reshape(1)
    if vec.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional", shape=vec.shape)
    if dim is not None and vec.shape[0] != dim:
        raise DimensionMismatch(f"{name} has length {vec.shape[0]}, expected {dim}", name=name)
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"{name} has non-finite entries")
    return vec


@dataclass(frozen=True, eq=False)
class SpdMatrix:
    """
    Symmetric positive definite matrix with a lazily computed Cholesky factor

    The input is symmetrized as (M + Mᵀ)/2. Asymmetry above 1e-8 (relative,
    Frobenius) is logged as a warning since pooled covariances only carry
    roundoff-level asymmetry.
    """

    entries: NDArray[np.float64] = field(repr=False)

    def __post_init__(self):
        raw = np.array(self.entries, dtype=float)
        if raw.ndim == 0:
            raw = raw.reshape(1, 1)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
            raise DimensionMismatch("matrix must be square", shape=raw.shape)
        if not np.all(np.isfinite(raw)):
            raise ValueError("matrix has non-finite entries")

        scale = np.linalg.norm(raw)
        asym = np.linalg.norm(raw - raw.T)
        if scale > 0 and asym / scale > ASYMMETRY_WARN_TOL:
            logger.warning("asymmetric_matrix_symmetrized", relative_asymmetry=float(asym / scale))

        sym = (raw + raw.T) / 2.0
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def factor(self) -> NDArray[np.float64]:
        """Lower-triangular L with L·Lᵀ equal to the matrix"""
        return _factorize(self.entries)

    def matvec(self, vec: ArrayLike) -> Vec:
        return self.entries @ as_vec(vec, self.dim)

    def solve(self, rhs: ArrayLike) -> NDArray[np.float64]:
        """Solve M·x = rhs for a vector or a matrix of right-hand sides"""
        arr = np.asarray(rhs, dtype=float)
        if arr.shape[0] != self.dim:
            raise DimensionMismatch(
                f"right-hand side has leading dimension {arr.shape[0]}, expected {self.dim}"
            )
        return sla.cho_solve((self.factor, True), arr, check_finite=False)

    def inverse(self) -> NDArray[np.float64]:
        """Explicit inverse; only for callers that need the full matrix"""
        return self.solve(np.eye(self.dim))


def _factorize(entries: NDArray[np.float64]) -> NDArray[np.float64]:
    try:
        lower = sla.cholesky(entries, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        raise NotPositiveDefinite(f"Cholesky factorization failed: {exc}", dim=entries.shape[0]) from exc
    if not np.all(np.diag(lower) > 0):
        raise NotPositiveDefinite("Cholesky factorization hit a non-positive pivot", dim=entries.shape[0])
    return lower


def cholesky(m: SpdMatrix) -> NDArray[np.float64]:
    """
    Lower Cholesky factor of an SPD matrix

    Raises:
        NotPositiveDefinite: when a pivot is not positive
    """
    return m.factor


def spd_solve(m: SpdMatrix, b: ArrayLike) -> Vec:
    """Solve m·x = b through the cached Cholesky factor"""
    return m.solve(as_vec(b, m.dim, "right-hand side"))


def quadratic_form(a: ArrayLike, m: SpdMatrix, b: ArrayLike) -> float:
    """aᵀ·m·b"""
    left = as_vec(a, m.dim, "left vector")
    right = as_vec(b, m.dim, "right vector")
    return float(left @ (m.entries @ right))


def ar1_matrix(p: int, rho: float) -> SpdMatrix:
    """AR(1) correlation matrix with entries rho^|i-j|"""
    if p < 1:
        raise DimensionMismatch(f"dimension must be positive, got {p}")
    if not -1.0 < rho < 1.0:
        raise NotPositiveDefinite(f"AR(1) correlation must lie in (-1, 1), got {rho}", rho=rho)
    return SpdMatrix(sla.toeplitz(np.power(float(rho), np.arange(p))))
