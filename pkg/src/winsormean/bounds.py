"""Explicit finite-sample error bounds for the winsorized mean and its
adaptive variant, evaluated from closed-form constants.

The smallest of the intermediate constants is carried in log-space so the
usable lambda1 range extends toward 1 before the derived constants overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .special import DomainError

__all__ = [
    "BoundConstants",
    "ConstantsOverflowError",
    "bound_constants",
    "theorem1_bound",
    "theorem2_bound",
    "quantile_mean_bound",
]


class ConstantsOverflowError(OverflowError):
    """Derived bound constants exceed double precision (lambda1 too close to 1)."""


@dataclass(frozen=True)
class BoundConstants:
    """Closed-form constants of the deviation bounds.

    frak_l / frak_u sandwich the quantile-contraction factors; frak_A scales
    the contamination term, frak_B the stochastic term, frak_C = frak_A +
    frak_B scales the adaptive-estimator bound. frak_l may underflow to 0.0
    for extreme lambda1; log_frak_l is always exact.
    """

    frak_l: float
    frak_u: float
    A_m_l1: float
    Bbar_m: float
    frak_A: float
    frak_B: float
    frak_C: float
    m: float
    lambda1: float
    lambda2: float
    log_frak_l: float


def bound_constants(m: float, lambda1: float, lambda2: float) -> BoundConstants:
    """Evaluate the constants entering the deviation bounds."""
    if m < 1.0:
        raise DomainError(f"m must be >= 1, got {m}")
    if lambda1 <= 1.0:
        raise DomainError(f"lambda1 must exceed 1, got {lambda1}")
    if lambda2 <= 0.0:
        raise DomainError(f"lambda2 must be positive, got {lambda2}")

    one_minus = -math.expm1(-math.log(lambda1))  # 1 - 1/lambda1, accurately
    log_l = math.log(one_minus) - 1.0 / (lambda2 * one_minus) - 1.0
    frak_l = math.exp(log_l)
    inv2 = 1.0 / lambda2
    frak_u = 2.0 + inv2 + math.sqrt(inv2 * inv2 + 4.0 * inv2)

    try:
        a_m = math.exp(-log_l / m) + 1.0  # A_m(frak_l, 1)
        ratio_root = math.exp((math.log(frak_u) - log_l) / m)  # (u/l)^(1/m)
    except OverflowError as exc:
        raise ConstantsOverflowError(
            f"constants overflow for m={m}, lambda1={lambda1}, lambda2={lambda2}"
        ) from exc
    bbar = 2.0 + (1.0 + ratio_root) * frak_u ** (1.0 - 1.0 / m)

    frak_a = lambda1 ** (-1.0 / m) * (a_m + lambda1 * bbar)
    sqrt2_exponent = 1.0 - min(m, 2.0) / 2.0
    frak_b = math.sqrt(2.0) * (lambda2 ** (-1.0 / m) * a_m) ** sqrt2_exponent + (
        lambda2 ** (-1.0 / m) * (a_m / 3.0 + lambda2 * bbar)
    )
    for value in (a_m, bbar, frak_a, frak_b):
        if not math.isfinite(value):
            raise ConstantsOverflowError(
                f"constants overflow for m={m}, lambda1={lambda1}, lambda2={lambda2}"
            )
    return BoundConstants(
        frak_l=frak_l,
        frak_u=frak_u,
        A_m_l1=a_m,
        Bbar_m=bbar,
        frak_A=frak_a,
        frak_B=frak_b,
        frak_C=frak_a + frak_b,
        m=m,
        lambda1=lambda1,
        lambda2=lambda2,
        log_frak_l=log_l,
    )


def _eta_term(eta: float, m: float) -> float:
    # For m = 1 the exponent is 0; the eta term may be dropped when eta = 0.
    if eta == 0.0:
        return 0.0
    return eta ** (1.0 - 1.0 / m)


def theorem1_bound(
    sigma_m: float,
    m: float,
    lambda1: float,
    lambda2: float,
    eta: float,
    delta: float,
    n: int,
) -> float:
    """Deviation bound sigma_m*(frak_A*eta^{1-1/m} + frak_B*L^{1-1/min(m,2)})
    with L = log(6/delta)/n, holding with probability at least 1-delta."""
    if sigma_m < 0.0:
        raise DomainError(f"sigma_m must be >= 0, got {sigma_m}")
    if sigma_m == 0.0:
        return 0.0
    k = bound_constants(m, lambda1, lambda2)
    big_l = math.log(6.0 / delta) / n
    return sigma_m * (
        k.frak_A * _eta_term(eta, m) + k.frak_B * big_l ** (1.0 - 1.0 / min(m, 2.0))
    )


def theorem2_bound(
    sigma_m: float,
    m: float,
    lambda1: float,
    lambda2: float,
    eta_min: float,
    rho: float,
    delta: float,
    n: int,
    g_max: int,
) -> float:
    """Deviation bound of the adaptive estimator,
    2*sigma_m*(frak_A*(eta_min/rho)^{1-1/m} + frak_C*L_A^{1-1/min(m,2)})
    with L_A = log(6*g_max/delta)/n."""
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")
    if not 0.0 <= eta_min <= 0.5 * rho:
        raise DomainError(f"eta_min must lie in [0, rho/2], got {eta_min}")
    if sigma_m < 0.0:
        raise DomainError(f"sigma_m must be >= 0, got {sigma_m}")
    if sigma_m == 0.0:
        return 0.0
    k = bound_constants(m, lambda1, lambda2)
    big_l = math.log(6.0 * g_max / delta) / n
    return (
        2.0
        * sigma_m
        * (
            k.frak_A * _eta_term(eta_min / rho, m)
            + k.frak_C * big_l ** (1.0 - 1.0 / min(m, 2.0))
        )
    )


def quantile_mean_bound(sigma_m: float, m: float, p: float) -> tuple[float, float]:
    """Envelope for Q_p(Z) - E[Z]: (-sigma_m/p^{1/m}, +sigma_m/(1-p)^{1/m})."""
    if sigma_m < 0.0:
        raise DomainError(f"sigma_m must be >= 0, got {sigma_m}")
    if m < 1.0:
        raise DomainError(f"m must be >= 1, got {m}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")
    if sigma_m == 0.0:
        return (0.0, 0.0)
    return (-sigma_m / p ** (1.0 / m), sigma_m / (1.0 - p) ** (1.0 / m))
