"""Adaptation to the unknown contamination fraction by interval
intersection over a geometric grid: per-level confidence balls, the longest
consistent prefix, and the midpoint / grid-element estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import bound_constants
from .estimators import EstimatorParams, check_feasibility, winsorized_mean_sorted
from .special import DomainError

__all__ = [
    "LepskiGrid",
    "LevelInterval",
    "AdaptiveResult",
    "NoFeasibleLevel",
    "build_grid",
    "eps_A",
    "B_of",
    "AdaptivePlan",
    "adaptive_estimate",
    "eta_min_of",
]


class NoFeasibleLevel(RuntimeError):
    """Every grid level yields the whole real line; no midpoint exists."""


@dataclass(frozen=True)
class LepskiGrid:
    rho: float
    g_max: int
    etas: tuple[float, ...]  # 0.5*rho^j, j = 1..g_max, strictly decreasing
    delta: float
    n: int


@dataclass(frozen=True)
class LevelInterval:
    """Confidence set at one grid level: a ball or the whole line."""

    level: int  # 1-based grid index
    center: float | None  # None encodes the whole line
    radius: float | None

    @property
    def is_ball(self) -> bool:
        return self.center is not None


@dataclass(frozen=True)
class AdaptiveResult:
    g_hat: int
    estimate_midpoint: float
    estimate_grid: float
    final_interval: tuple[float, float]
    intervals: tuple[LevelInterval, ...]


def build_grid(rho: float, delta: float, n: int) -> LepskiGrid:
    """Geometric grid eta_j = 0.5*rho^j with g_max = ceil(log_rho(2L)), L = log(6/delta)/n."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    if n < 4:
        raise DomainError(f"n must be >= 4, got {n}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    target = 2.0 * math.log(6.0 / delta) / n
    if target >= 1.0:  # equivalent to delta <= 6*exp(-n/2)
        raise DomainError(f"delta={delta} too small for n={n}: grid would be empty")
    g_max = math.ceil(math.log(target) / math.log(rho) - 1e-12)
    etas = tuple(0.5 * rho**j for j in range(1, g_max + 1))
    return LepskiGrid(rho=rho, g_max=g_max, etas=etas, delta=delta, n=n)


def eps_A(eta_j: float, grid: LepskiGrid, lambda1: float, lambda2: float) -> float:
    """Per-level clipping fraction; the base rule with delta -> delta/g_max."""
    return lambda1 * eta_j + lambda2 * math.log(6.0 * grid.g_max / grid.delta) / grid.n


def B_of(
    z: float,
    sigma_m: float,
    m: float,
    lambda1: float,
    lambda2: float,
    grid: LepskiGrid,
) -> float:
    """Radius sigma_m*(frak_A*z^{1-1/m} + frak_B*L_A^{1-1/min(m,2)})."""
    if z < 0.0:
        raise DomainError(f"z must be >= 0, got {z}")
    if sigma_m == 0.0:
        return 0.0
    k = bound_constants(m, lambda1, lambda2)
    big_l = math.log(6.0 * grid.g_max / grid.delta) / grid.n
    z_term = 0.0 if z == 0.0 and m > 1.0 else z ** (1.0 - 1.0 / m)
    return sigma_m * (k.frak_A * z_term + k.frak_B * big_l ** (1.0 - 1.0 / min(m, 2.0)))


class AdaptivePlan:
    """Precomputed grid, per-level clipping fractions, feasibility flags and
    radii; only the per-level centers depend on the data."""

    def __init__(
        self,
        n: int,
        sigma_m: float,
        m: float,
        rho: float,
        delta: float,
        lambda1: float,
        lambda2: float,
    ):
        self.grid = build_grid(rho, delta, n)
        self.sigma_m = sigma_m
        self.m = m
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.eps_values = tuple(
            eps_A(eta, self.grid, lambda1, lambda2) for eta in self.grid.etas
        )
        delta_a = delta / self.grid.g_max
        self.feasible = tuple(
            check_feasibility(
                EstimatorParams(
                    lambda1=lambda1, lambda2=lambda2, delta=delta_a, eta=eta, n=n
                )
            ).simple_ok
            for eta in self.grid.etas
        )
        self.radii = tuple(
            B_of(eta, sigma_m, m, lambda1, lambda2, self.grid)
            for eta in self.grid.etas
        )
        if not any(self.feasible):
            raise NoFeasibleLevel(
                f"no grid level satisfies the feasibility condition (n={n})"
            )

    def evaluate(self, sorted_values: np.ndarray) -> AdaptiveResult:
        intervals = []
        for j, (eps, ok, radius) in enumerate(
            zip(self.eps_values, self.feasible, self.radii), start=1
        ):
            if ok:
                center = winsorized_mean_sorted(sorted_values, eps)
                intervals.append(LevelInterval(level=j, center=center, radius=radius))
            else:
                intervals.append(LevelInterval(level=j, center=None, radius=None))

        # Longest prefix with non-empty intersection; whole-line levels do
        # not constrain it. Emptiness is exact (lo > hi), no epsilon slack.
        lo, hi = -math.inf, math.inf
        g_hat = len(intervals)
        for iv in intervals:
            if not iv.is_ball:
                continue
            new_lo = max(lo, iv.center - iv.radius)
            new_hi = min(hi, iv.center + iv.radius)
            if new_lo > new_hi:
                g_hat = iv.level - 1
                break
            lo, hi = new_lo, new_hi
        if not math.isfinite(lo):
            raise NoFeasibleLevel("every level interval is the whole real line")

        midpoint = 0.5 * (lo + hi)
        grid_estimate = winsorized_mean_sorted(
            sorted_values, self.eps_values[g_hat - 1]
        )
        return AdaptiveResult(
            g_hat=g_hat,
            estimate_midpoint=midpoint,
            estimate_grid=grid_estimate,
            final_interval=(lo, hi),
            intervals=tuple(intervals),
        )


def adaptive_estimate(
    xs: Sequence[float],
    sigma_m: float,
    m: float,
    rho: float,
    delta: float,
    lambda1: float,
    lambda2: float,
) -> AdaptiveResult:
    """Run the full adaptive construction on a sample."""
    values = np.sort(np.asarray(xs, dtype=float))
    if values.ndim != 1 or values.size < 1:
        raise DomainError("sample must be a non-empty 1-d sequence")
    plan = AdaptivePlan(
        n=values.size,
        sigma_m=sigma_m,
        m=m,
        rho=rho,
        delta=delta,
        lambda1=lambda1,
        lambda2=lambda2,
    )
    return plan.evaluate(values)


def eta_min_of(outlier_count: int, n: int) -> float:
    """Smallest non-random contamination fraction: outlier_count / n."""
    if not 0 <= outlier_count <= n:
        raise DomainError(f"outlier_count must lie in 0..{n}, got {outlier_count}")
    return outlier_count / n
