"""
Scalar special functions and the deterministic randomness contract

Φ and Φ⁻¹ come from scipy's cephes routines (``ndtr`` via the complementary
error function, ``ndtri`` via piecewise rational approximations), which are
accurate to a few ulps over the whole range the classifiers use.

Random streams are ``numpy.random.Generator`` objects on the PCG64 bit
generator, seeded by ``SeedSequence(entropy=base_seed, spawn_key=(stream_index,))``.
PCG64 output and SeedSequence hashing are specified bit-for-bit by numpy and do
not depend on platform, thread count or execution order. Normal deviates are
drawn with numpy's ziggurat sampler (``Generator.standard_normal``).
"""
import math
from dataclasses import dataclass
from typing import Annotated, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import Field
from scipy import special, stats

from app.core.errors import InvalidLevel

# Probability in [0, 1]; used as a field type in pydantic models
Probability = Annotated[float, Field(ge=0.0, le=1.0)]

FloatOrArray = Union[float, NDArray[np.float64]]

_UINT64_MASK = (1 << 64) - 1


def check_level(value: float, name: str = "level") -> float:
    """Validate that a level lies strictly inside (0, 1)"""
    if not (isinstance(value, (int, float, np.floating)) and 0.0 < float(value) < 1.0):
        raise InvalidLevel(f"{name} must lie strictly inside (0, 1), got {value!r}", **{name: value})
    return float(value)


def std_normal_cdf(x: ArrayLike) -> FloatOrArray:
    """Standard normal CDF Φ(x)"""
    out = special.ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


def std_normal_quantile(p: ArrayLike) -> FloatOrArray:
    """
    Standard normal quantile Φ⁻¹(p)

    Args:
        p: probability (or array of probabilities) strictly inside (0, 1)

    Returns:
        The quantile; a float for scalar input

    Raises:
        InvalidLevel: when any p lies outside (0, 1)
    """
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise InvalidLevel(f"quantile level must lie strictly inside (0, 1), got {p!r}")
    out = special.ndtri(arr)
    return float(out) if out.ndim == 0 else out


def binom_upper_tail(m: int, k: int, q: float) -> float:
    """
    Upper binomial tail ν(k) = Σ_{j=k}^{m} C(m, j) q^j (1-q)^{m-j}

    Evaluated through the regularized incomplete beta function, which keeps
    full relative accuracy for m up to 10^6.
    """
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    if not 0 <= k <= m:
        raise ValueError(f"k must lie in [0, {m}], got {k}")
    if k == 0:
        return 1.0
    return float(stats.binom.sf(k - 1, m, q))


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one reproducible random stream"""

    base_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if self.base_seed < 0 or self.base_seed > _UINT64_MASK:
            raise ValueError(f"base_seed must be an unsigned 64-bit integer, got {self.base_seed}")
        if self.stream_index < 0:
            raise ValueError(f"stream_index must be non-negative, got {self.stream_index}")

    def spawn(self, *keys: int) -> "SeedSpec":
        """Derive an independent sub-stream keyed by non-negative integers"""
        seq = np.random.SeedSequence(entropy=self.stream_index, spawn_key=tuple(int(k) for k in keys))
        lo, hi = seq.generate_state(2, dtype=np.uint32)
        return SeedSpec(self.base_seed, (int(hi) << 32) | int(lo))


def rng_stream(seed: SeedSpec) -> np.random.Generator:
    """Random stream for a SeedSpec; identical specs give identical draws"""
    seq = np.random.SeedSequence(entropy=seed.base_seed, spawn_key=(seed.stream_index,))
    return np.random.Generator(np.random.PCG64(seq))


def log_ratio_ceiling(numerator: float, denominator: float) -> int:
    """⌈numerator / denominator⌉ robust to ratios that are integers up to roundoff"""
    ratio = numerator / denominator
    nearest = round(ratio)
    if math.isclose(ratio, nearest, rel_tol=1e-12, abs_tol=1e-12):
        return int(nearest)
    return int(math.ceil(ratio))
