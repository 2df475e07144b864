"""
Marchenko-Pastur closed forms and Monte-Carlo checks of the large-dimension expansions

X is a p×n matrix with i.i.d. entries of variance (np)^{-1/2} and r = p/n < 1.
m₁ is the limiting Stieltjes transform of XXᵀ (p×p) and m₂ that of XᵀX (n×n).
Both spectra live on [λ₋, λ₊] with λ± = √r + 1/√r ± 2; XᵀX carries an extra
atom of mass 1−r at 0, which is why z·m₂ is the quantity that stays analytic at 0.

m₁ solves z√r·m² + (z − 1/√r + √r)·m + 1 = 0. Its Stieltjes branch is written as
c/q with q = −b(1 + √(1 − 4ac/b²))/2 on the principal square root; that expression
is analytic on ℂ minus [λ₋, λ₊] because 1 − 4ac/b² is a negative real only for
real z inside the support. z·m₂ follows from the identity 1 + z·m₁ = (1 + z·m₂)/r.
"""
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from pydantic import BaseModel, ConfigDict
from scipy import stats as sps

from app.core.errors import InsufficientSamples, NonPositiveSignal, RatioOutOfRange
from app.core.linalg import quadratic_form
from app.core.logging import get_logger
from app.core.numerics import SeedSpec, rng_stream, std_normal_quantile
from app.core.output import write_frame
from app.ml.classifiers import NpLevels, elda_f_hat, elda_variance
from app.ml.model import LdaModel
from app.ml.sampling import compute_stats, sample_gaussian

logger = get_logger(__name__)

ComplexLike = Union[complex, np.ndarray]

COMPLEX_STEP = 1e-20
MAX_NONPOSITIVE_FRACTION = 0.01


def _check_ratio(r: float) -> float:
    if not 0.0 < r < 1.0:
        raise RatioOutOfRange(f"aspect ratio must lie in (0, 1), got {r}", r=r)
    return float(r)


@dataclass(frozen=True)
class MpParams:
    """Aspect ratio and support edges of the Marchenko-Pastur law"""

    r: float

    def __post_init__(self):
        _check_ratio(self.r)

    @property
    def lambda_minus(self) -> float:
        return math.sqrt(self.r) + 1.0 / math.sqrt(self.r) - 2.0

    @property
    def lambda_plus(self) -> float:
        return math.sqrt(self.r) + 1.0 / math.sqrt(self.r) + 2.0


@dataclass(frozen=True)
class MpValuesAtZero:
    """Values and first three derivatives of m₁ and z·m₂ at z = 0"""

    m1_0: float
    m1p_0: float
    m1pp_0: float
    m1ppp_0: float
    zm2_0: float
    zm2p_0: float
    zm2pp_0: float
    zm2ppp_0: float

    def m1_derivatives(self) -> List[float]:
        return [self.m1_0, self.m1p_0, self.m1pp_0, self.m1ppp_0]

    def zm2_derivatives(self) -> List[float]:
        return [self.zm2_0, self.zm2p_0, self.zm2pp_0, self.zm2ppp_0]


def mp_m1(z: ComplexLike, r: float) -> ComplexLike:
    """
    Stieltjes transform m₁(z) of the limiting spectrum of XXᵀ

    Defined off the support [λ₋, λ₊]; Im m₁(z) > 0 whenever Im z > 0.

    Raises:
        RatioOutOfRange: when r is outside (0, 1)
        ValueError: when z is a real point of the support
    """
    params = MpParams(_check_ratio(r))
    zz = np.asarray(z, dtype=complex)
    on_support = (zz.imag == 0) & (zz.real >= params.lambda_minus) & (zz.real <= params.lambda_plus)
    if np.any(on_support):
        raise ValueError("m1 is undefined on the real spectral support")

    root_r = math.sqrt(r)
    a = zz * root_r
    b = zz - 1.0 / root_r + root_r
    q = -b * (1.0 + np.sqrt(1.0 - 4.0 * a / b**2)) / 2.0
    out = 1.0 / q
    return complex(out) if out.ndim == 0 else out


def mp_zm2(z: ComplexLike, r: float) -> ComplexLike:
    """z·m₂(z), analytic at 0 with value r − 1"""
    zz = np.asarray(z, dtype=complex)
    out = r * (1.0 + zz * np.asarray(mp_m1(zz, r))) - 1.0
    return complex(out) if np.ndim(out) == 0 else out


def mp_m2(z: ComplexLike, r: float) -> ComplexLike:
    """Stieltjes transform m₂(z) of the limiting spectrum of XᵀX; z ≠ 0"""
    zz = np.asarray(z, dtype=complex)
    if np.any(zz == 0):
        raise ValueError("m2 has a pole at z = 0; use mp_zm2")
    out = np.asarray(mp_zm2(zz, r)) / zz
    return complex(out) if out.ndim == 0 else out


def mp_density(x: Union[float, np.ndarray], r: float, kind: str = "m1") -> Union[float, np.ndarray]:
    """
    Continuous part of the limiting spectral density

    ``kind="m1"`` is the spectrum of XXᵀ (mass 1); ``kind="m2"`` the spectrum of
    XᵀX without its atom at 0 (mass r).
    """
    params = MpParams(_check_ratio(r))
    xx = np.asarray(x, dtype=float)
    gap = np.clip((params.lambda_plus - xx) * (xx - params.lambda_minus), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "m1":
            dens = np.sqrt(gap) / (2.0 * np.pi * xx * math.sqrt(r))
        elif kind == "m2":
            dens = math.sqrt(r) * np.sqrt(gap) / (2.0 * np.pi * xx)
        else:
            raise ValueError(f"kind must be 'm1' or 'm2', got {kind!r}")
    dens = np.where(gap > 0, dens, 0.0)
    return float(dens) if dens.ndim == 0 else dens


def mp_values_at_zero(r: float) -> MpValuesAtZero:
    """Closed-form values and derivatives at z = 0"""
    r = _check_ratio(r)
    s = 1.0 - r
    return MpValuesAtZero(
        m1_0=math.sqrt(r) / s,
        m1p_0=r / s**3,
        m1pp_0=2.0 * r**1.5 * (1.0 + r) / s**5,
        m1ppp_0=6.0 * r**2 * (1.0 + 3.0 * r + r**2) / s**7,
        zm2_0=r - 1.0,
        zm2p_0=r**1.5 / s,
        zm2pp_0=2.0 * r**2 / s**3,
        zm2ppp_0=6.0 * r**2.5 * (1.0 + r) / s**5,
    )


def complex_step_derivative(func: Callable[[complex], complex], x0: float = 0.0, h: float = COMPLEX_STEP) -> float:
    """f'(x0) ≈ Im f(x0 + ih)/h for f analytic and real on the real axis near x0"""
    return float(np.imag(func(complex(x0, h))) / h)


def cauchy_derivatives(
    func: Callable[[np.ndarray], np.ndarray], max_order: int, radius: float, n_points: int = 128
) -> np.ndarray:
    """
    Derivatives f^(k)(0), k = 0..max_order, by the trapezoidal rule on |z| = radius

    The nodes are offset by half a step so none lies on the real axis. The rule
    converges geometrically when f is analytic on a disk larger than the contour.
    """
    theta = 2.0 * np.pi * (np.arange(n_points) + 0.5) / n_points
    nodes = radius * np.exp(1j * theta)
    values = np.asarray(func(nodes), dtype=complex)
    out = np.empty(max_order + 1)
    for k in range(max_order + 1):
        coeff = np.mean(values * np.exp(-1j * k * theta)) / radius**k
        out[k] = math.factorial(k) * coeff.real
    return out


@dataclass(frozen=True)
class IdentityCheck:
    """One numeric check of the Marchenko-Pastur identities"""

    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance


def mp_check_grid(r: float, size: int = 100) -> np.ndarray:
    """Points of the upper half-plane around the support, plus points of the disk |z| < λ₋"""
    params = MpParams(_check_ratio(r))
    n_outer = max(size - size // 5, 1)
    side = int(math.ceil(math.sqrt(n_outer)))
    xs = np.linspace(-1.0, params.lambda_plus + 1.0, side)
    ys = np.geomspace(0.05, 2.0, side)
    outer = (xs[:, None] + 1j * ys[None, :]).ravel()[:n_outer]
    n_inner = size - n_outer
    angles = 2.0 * np.pi * (np.arange(n_inner) + 0.25) / max(n_inner, 1)
    inner = 0.5 * params.lambda_minus * np.exp(1j * angles)
    return np.concatenate([outer, inner])


def mp_identity_report(r: float, grid: int = 100) -> List[IdentityCheck]:
    """
    Residuals of the self-consistent equations, the m₁/m₂ identity and the
    derivative values at 0 against numerical differentiation
    """
    params = MpParams(_check_ratio(r))
    z = mp_check_grid(r, grid)
    root_r = math.sqrt(r)
    m1 = np.asarray(mp_m1(z, r))
    w = np.asarray(mp_zm2(z, r))

    m1_residual = np.abs(z * root_r * m1**2 + (z - 1.0 / root_r + root_r) * m1 + 1.0)
    w_residual = np.abs(w**2 / root_r + (z + (1.0 - r) / root_r) * w + z)
    identity = np.abs(m1 * z * (1.0 + w / (z * root_r)) + 1.0)
    upper = z.imag > 0
    upper_ok = np.all(m1[upper].imag > 0) and np.all((w[upper] / z[upper]).imag > 0)

    closed = mp_values_at_zero(r)
    checks = [
        IdentityCheck("m1_self_consistent_residual", float(m1_residual.max()), 1e-12),
        IdentityCheck("zm2_self_consistent_residual", float(w_residual.max()), 1e-12),
        IdentityCheck("m1_m2_identity_residual", float(identity.max()), 1e-10),
        IdentityCheck("upper_half_plane_violations", 0.0 if upper_ok else 1.0, 0.5),
    ]

    step_m1 = complex_step_derivative(lambda s: mp_m1(s, r))
    step_zm2 = complex_step_derivative(lambda s: mp_zm2(s, r))
    checks.append(IdentityCheck("m1p_0_complex_step", _rel(step_m1, closed.m1p_0), 1e-8))
    checks.append(IdentityCheck("zm2p_0_complex_step", _rel(step_zm2, closed.zm2p_0), 1e-8))

    radius = 0.5 * params.lambda_minus
    m1_derivs = cauchy_derivatives(lambda s: mp_m1(s, r), 3, radius)
    zm2_derivs = cauchy_derivatives(lambda s: mp_zm2(s, r), 3, radius)
    names = ["0", "p_0", "pp_0", "ppp_0"]
    for k, (num, ref) in enumerate(zip(m1_derivs, closed.m1_derivatives())):
        checks.append(IdentityCheck(f"m1{names[k]}_contour", _rel(num, ref), 1e-8))
    for k, (num, ref) in enumerate(zip(zm2_derivs, closed.zm2_derivatives())):
        checks.append(IdentityCheck(f"zm2{names[k]}_contour", _rel(num, ref), 1e-8))
    return checks


def _rel(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), 1e-300)


# Monte-Carlo verification


class VerificationRow(BaseModel):
    """One line of a verification report"""

    model_config = ConfigDict(extra="forbid")

    quantity: str
    n: int
    p: int
    r: float
    median_rel_dev: Optional[float] = None
    ks_stat: Optional[float] = None
    var_z: Optional[float] = None


VERIFICATION_COLUMNS = ["quantity", "n", "p", "r", "median_rel_dev", "ks_stat", "var_z"]


def write_verification_csv(rows: Sequence[VerificationRow], path) -> None:
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=VERIFICATION_COLUMNS)
    write_frame(frame, path)


LEMMA2_QUANTITIES = ("a_sigma_a", "signal", "a_mu_d", "a_mu0_shift")


def _lemma2_rep(model: LdaModel, n0: int, n1: int, seed: SeedSpec) -> np.ndarray:
    stats = compute_stats(sample_gaussian(model, n0, n1, seed))
    r, v1sq, delta = stats.r, stats.v1_norm_sq, model.delta_d
    lead_a_sigma_a = (r * v1sq + delta) / (1.0 - r) ** 3
    lead_signal = (r * v1sq + delta) / (1.0 - r)
    lead_a_mu_d = delta / (1.0 - r)
    lead_shift = -(stats.n / n0) * r / (1.0 - r)

    a_sigma_a = quadratic_form(stats.a_hat, model.sigma, stats.a_hat)
    a_mu_d = float(stats.a_hat @ model.mu_d)
    shift = float(stats.a_hat @ (stats.mu0_hat - model.mu0))
    return np.array(
        [
            abs(a_sigma_a - lead_a_sigma_a) / lead_a_sigma_a,
            abs(stats.signal - lead_signal) / lead_signal,
            abs(a_mu_d - lead_a_mu_d) / lead_a_mu_d,
            abs(shift - lead_shift) / math.sqrt(delta),
        ]
    )


def verify_lemma2(
    model: LdaModel, n0: int, n1: int, reps: int, seed: SeedSpec, workers: int = 1
) -> List[VerificationRow]:
    """
    Median relative deviation of the four sample quadratic forms from their
    leading terms, across seeded repetitions

    The shift âᵀμ̂⁰ − âᵀμ⁰ is measured against √Δ_d.

    Raises:
        InsufficientSamples: when n − 2 ≤ p
    """
    n = n0 + n1
    if n - 2 <= model.p:
        raise InsufficientSamples("concentration check needs n - 2 > p", n=n, p=model.p)
    if not model.delta_d > 0:
        raise NonPositiveSignal("concentration check needs a positive Mahalanobis distance", delta_d=model.delta_d)

    logger.info("lemma2_check_started", n0=n0, n1=n1, p=model.p, reps=reps)
    devs = Parallel(n_jobs=workers)(delayed(_lemma2_rep)(model, n0, n1, seed.spawn(rep)) for rep in range(reps))
    medians = np.median(np.vstack(devs), axis=0)
    return [
        VerificationRow(quantity=name, n=n, p=model.p, r=model.p / n, median_rel_dev=float(med))
        for name, med in zip(LEMMA2_QUANTITIES, medians)
    ]


def _theta_rep(model: LdaModel, levels: NpLevels, n0: int, n1: int, seed: SeedSpec) -> float:
    stats = compute_stats(sample_gaussian(model, n0, n1, seed))
    try:
        breakdown = elda_variance(stats, levels.alpha)
    except NonPositiveSignal:
        return float("nan")
    phi_a = std_normal_quantile(1.0 - levels.alpha)
    f_true = math.sqrt(quadratic_form(stats.a_hat, model.sigma, stats.a_hat)) * phi_a + float(
        stats.a_hat @ model.mu0
    )
    f_hat = elda_f_hat(stats, levels.alpha)
    return math.sqrt(stats.n) * (f_hat - f_true) / math.sqrt(breakdown.s_term * breakdown.v_total)


def theta_z_values(
    model: LdaModel, levels: NpLevels, n0: int, n1: int, reps: int, seed: SeedSpec, workers: int = 1
) -> np.ndarray:
    """Standardized threshold errors √n(F̂ − F)/√(S·V̂), NaN where S ≤ 0"""
    values = Parallel(n_jobs=workers)(
        delayed(_theta_rep)(model, levels, n0, n1, seed.spawn(rep)) for rep in range(reps)
    )
    return np.asarray(values, dtype=float)


def verify_theta_clt(
    model: LdaModel, levels: NpLevels, n0: int, n1: int, reps: int, seed: SeedSpec, workers: int = 1
) -> VerificationRow:
    """
    KS distance of the standardized threshold error to N(0, 1), with its variance

    Raises:
        NonPositiveSignal: when more than 1% of repetitions have S ≤ 0
    """
    logger.info("theta_clt_check_started", n0=n0, n1=n1, p=model.p, reps=reps)
    z = theta_z_values(model, levels, n0, n1, reps, seed, workers)
    bad = int(np.isnan(z).sum())
    if bad > MAX_NONPOSITIVE_FRACTION * reps:
        raise NonPositiveSignal(
            f"{bad} of {reps} repetitions had a non-positive corrected signal", failed=bad, reps=reps
        )
    z = np.sort(z[~np.isnan(z)])
    ks = sps.kstest(z, "norm")
    n = n0 + n1
    return VerificationRow(
        quantity="theta_clt",
        n=n,
        p=model.p,
        r=model.p / n,
        ks_stat=float(ks.statistic),
        var_z=float(np.var(z, ddof=1)),
    )


def verify_mp_spectrum(p: int, n: int, z_grid: Sequence[complex], seed: SeedSpec) -> np.ndarray:
    """
    |m₁ₙ(z) − m₁(z)| on a grid, where m₁ₙ is the empirical Stieltjes transform of
    XXᵀ for one Gaussian draw with entry variance (np)^{-1/2}
    """
    r = _check_ratio(p / n)
    x = rng_stream(seed).standard_normal((p, n)) / (n * p) ** 0.25
    eigs = np.linalg.eigvalsh(x @ x.T)
    zz = np.asarray(z_grid, dtype=complex)
    empirical = np.mean(1.0 / (eigs[None, :] - zz[:, None]), axis=1)
    return np.abs(empirical - np.asarray(mp_m1(zz, r)))
