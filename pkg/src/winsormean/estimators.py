"""Point estimators of a population mean under heavy tails and adversarial
contamination: the winsorized mean with the eta-driven clipping-fraction
rule, plus the comparison estimators used by the benchmark harness
(sample mean, trimmed mean, sample-split winsorized mean, median-of-means).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .special import DomainError, ExponentContext, c1_c2

__all__ = [
    "EstimatorParams",
    "FeasibilityReport",
    "NotImplementable",
    "NOT_IMPLEMENTABLE",
    "clamp",
    "order_statistic",
    "epsilon_of_eta",
    "check_feasibility",
    "winsorized_mean",
    "sample_mean",
    "trimmed_mean",
    "lm21_winsorized_mean",
    "lm21_implementable",
    "median_of_means",
    "default_block_count",
    "ceil_index",
    "floor_index",
]

# Tolerance used before taking integer ceilings/floors of eps*n, so that an
# analytically integral product perturbed to 1.0000000001 still maps to 1.
_INDEX_NUDGE = 1e-9


class NotImplementable:
    """Marker value for estimators whose clipping rule leaves no valid sample."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotImplementable"


NOT_IMPLEMENTABLE = NotImplementable()


def ceil_index(x: float) -> int:
    """Ceiling of x robust to upward float drift of integral values."""
    return math.ceil(x - _INDEX_NUDGE)


def floor_index(x: float) -> int:
    """Floor of x robust to downward float drift of integral values."""
    return math.floor(x + _INDEX_NUDGE)


@dataclass(frozen=True)
class EstimatorParams:
    """Configuration (lambda1, lambda2, delta, eta, n) of the clipping rule."""

    lambda1: float
    lambda2: float
    delta: float
    eta: float
    n: int

    def __post_init__(self):
        if self.lambda1 <= 1.0:
            raise DomainError(f"lambda1 must exceed 1, got {self.lambda1}")
        if self.lambda2 <= 0.0:
            raise DomainError(f"lambda2 must be positive, got {self.lambda2}")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class FeasibilityReport:
    eps: float
    simple_ok: bool      # conservative sufficient condition
    lambert_ok: bool     # exact condition eps*(c1+c2) < 1
    implementable: bool  # eps in (0, 1/2]
    simple_lhs: float
    lambert_lhs: float


def clamp(x: float, alpha: float, beta: float) -> float:
    """Clip x into [alpha, beta]."""
    if alpha > beta:
        raise DomainError(f"clamp requires alpha <= beta, got ({alpha}, {beta})")
    if x < alpha:
        return alpha
    if x > beta:
        return beta
    return x


def _as_array(xs: Sequence[float]) -> np.ndarray:
    a = np.asarray(xs, dtype=float)
    if a.ndim != 1 or a.size < 1:
        raise DomainError("sample must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(a)):
        raise DomainError("sample values must be finite")
    return a


def order_statistic(xs: Sequence[float], k: int) -> float:
    """k-th smallest value, 1-based, multiset semantics."""
    a = _as_array(xs)
    if not 1 <= k <= a.size:
        raise IndexError(f"order statistic index {k} outside 1..{a.size}")
    return float(np.sort(a)[k - 1])


def epsilon_of_eta(p: EstimatorParams) -> float:
    """Clipping fraction lambda1*eta + lambda2*log(6/delta)/n."""
    return p.lambda1 * p.eta + p.lambda2 * math.log(6.0 / p.delta) / p.n


def check_feasibility(p: EstimatorParams) -> FeasibilityReport:
    """Evaluate both feasibility conditions for the clipping fraction."""
    eps = epsilon_of_eta(p)
    big_l = math.log(6.0 / p.delta) / p.n
    simple_lhs = 2.0 * eps + big_l + math.sqrt(big_l * big_l + 4.0 * big_l * eps)
    ctx = ExponentContext(lambda1=p.lambda1, eta=p.eta)
    c1, c2 = c1_c2(p.n, p.delta, eps, ctx)
    lambert_lhs = eps * (c1 + c2)
    return FeasibilityReport(
        eps=eps,
        simple_ok=simple_lhs < 1.0,
        lambert_ok=lambert_lhs < 1.0,
        implementable=0.0 < eps <= 0.5,
        simple_lhs=simple_lhs,
        lambert_lhs=lambert_lhs,
    )


def winsorized_mean_sorted(sorted_values: np.ndarray, eps: float) -> float:
    """Winsorized mean on an already sorted array (fast path)."""
    n = sorted_values.size
    if not 0.0 < eps <= 0.5:
        raise DomainError(f"eps must lie in (0, 1/2], got {eps}")
    k_lo = max(1, ceil_index(eps * n))
    k_hi = ceil_index((1.0 - eps) * n)
    alpha = sorted_values[k_lo - 1]
    beta = sorted_values[k_hi - 1]
    assert alpha <= beta  # cannot fail for eps <= 1/2
    if alpha == beta:
        # every value clips to the same point (eps = 1/2: the sample median)
        return float(alpha)
    return float(np.clip(sorted_values, alpha, beta).mean())


def winsorized_mean(xs: Sequence[float], eps: float) -> float:
    """Mean after clipping every observation into the data-driven interval
    [x*_{ceil(eps*n)}, x*_{ceil((1-eps)*n)}].

    Averaging over the sorted clipped values makes the result exactly
    permutation invariant.
    """
    return winsorized_mean_sorted(np.sort(_as_array(xs)), eps)


def sample_mean(xs: Sequence[float]) -> float:
    """Arithmetic mean."""
    return float(_as_array(xs).mean())


def trimmed_mean(xs: Sequence[float], eps_t: float) -> float:
    """Mean after discarding the ceil(eps_t*n) smallest and largest values."""
    a = _as_array(xs)
    n = a.size
    if not 0.0 < eps_t < 0.5:
        raise DomainError(f"eps_t must lie in (0, 1/2), got {eps_t}")
    k = max(1, ceil_index(eps_t * n))
    if 2 * k >= n:
        raise DomainError(f"trimming {k} values per tail empties a sample of {n}")
    return float(np.mean(np.sort(a)[k : n - k]))


def lm21_epsilon(n: int, eta: float, delta: float) -> float:
    """Clipping fraction 8*eta + 24*log(4/delta)/n of the sample-split scheme."""
    return 8.0 * eta + 24.0 * math.log(4.0 / delta) / n


def lm21_implementable(n: int, eta: float, delta: float) -> bool:
    return eta < 1.0 / 16.0 and lm21_epsilon(n, eta, delta) <= 0.5


def lm21_winsorized_mean(
    xs: Sequence[float], eta: float, delta: float
) -> float | NotImplementable:
    """Sample-split winsorized mean: thresholds from the first half of the
    sample, mean of the clipped second half. Returns NOT_IMPLEMENTABLE when
    the scheme's clipping fraction exceeds 1/2 or eta >= 1/16.

    Odd n drops the last observation so both halves have floor(n/2) points.
    """
    a = _as_array(xs)
    n = a.size
    if not lm21_implementable(n, eta, delta):
        return NOT_IMPLEMENTABLE
    eps = lm21_epsilon(n, eta, delta)
    half = n // 2
    if half < 1:
        return NOT_IMPLEMENTABLE
    first = np.sort(a[:half])
    second = a[half : 2 * half]
    k_lo = max(1, ceil_index(eps * half))
    k_hi = ceil_index((1.0 - eps) * half)
    alpha = first[k_lo - 1]
    beta = first[k_hi - 1]
    if alpha > beta:
        return NOT_IMPLEMENTABLE
    return float(np.clip(second, alpha, beta).mean())


def default_block_count(n: int, delta: float) -> int:
    """Median-of-means block count ceil(8*log(1/delta)), capped at n."""
    return min(n, max(1, ceil_index(8.0 * math.log(1.0 / delta))))


def median_of_means(
    xs: Sequence[float], delta: float, blocks: int | None = None
) -> float:
    """Median of the means of contiguous near-equal blocks (in given order)."""
    a = _as_array(xs)
    k = default_block_count(a.size, delta) if blocks is None else blocks
    if not 1 <= k <= a.size:
        raise DomainError(f"block count {k} outside 1..{a.size}")
    means = [float(chunk.mean()) for chunk in np.array_split(a, k)]
    return float(np.median(means))
