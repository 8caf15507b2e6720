"""Numeric kernels: real branches of Lambert's W, binomial Chernoff
exponents, the exponent maps f/g with closed-form inverses, and the
quantile-contraction factors (c1, c2).

All functions are pure and stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "DomainError",
    "ExponentContext",
    "h_plus",
    "h_minus",
    "lambert_w0",
    "lambert_wm1",
    "f_exponent",
    "g_exponent",
    "f_inverse",
    "g_inverse",
    "c1_c2",
]

_INV_E = math.exp(-1.0)
# Callers pass analytically boundary-exact values that float arithmetic
# perturbs; absorb that with a small absolute tolerance at the boundary.
_BOUNDARY_TOL = 1e-14
# Below this distance from the branch point Halley loses an order of
# convergence; switch to the square-root series in p = sqrt(2(e*x+1)).
_SERIES_WINDOW = 1e-6


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


def h_plus(nu: float) -> float:
    """Upper multiplicative Chernoff exponent (1+v)log(1+v) - v, v >= 0."""
    if nu < 0.0:
        raise DomainError(f"h_plus requires nu >= 0, got {nu}")
    if nu == 0.0:
        return 0.0
    return (1.0 + nu) * math.log1p(nu) - nu


def h_minus(nu: float) -> float:
    """Lower multiplicative Chernoff exponent (1-v)log(1-v) + v, v in [0,1)."""
    if not 0.0 <= nu < 1.0:
        raise DomainError(f"h_minus requires nu in [0, 1), got {nu}")
    if nu == 0.0:
        return 0.0
    return (1.0 - nu) * math.log1p(-nu) + nu


def _branch_series(p: float) -> float:
    # Series about the branch point w = -1; p = +/- sqrt(2(e*x + 1)).
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))))


def _halley(x: float, w: float) -> float:
    for _ in range(50):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= 1e-14 * abs(w):
            break
    return w


def lambert_w0(x: float) -> float:
    """Principal branch W0 on [-1/e, inf); w*e^w = x with w >= -1."""
    if x < -_INV_E:
        if x < -_INV_E - _BOUNDARY_TOL:
            raise DomainError(f"lambert_w0 requires x >= -1/e, got {x}")
        x = -_INV_E
    if x == 0.0:
        return 0.0
    q = math.e * x + 1.0
    if q <= 0.0:
        return -1.0
    if abs(x + _INV_E) < _SERIES_WINDOW:
        return _branch_series(math.sqrt(2.0 * q))
    if abs(x) < 1e-2:
        w = x * (1.0 - x + 1.5 * x * x)
    elif x < 1.0:
        w = math.sqrt(2.0 * q) - 1.0
    elif x < 10.0:
        w = math.log1p(x)
    else:
        lx = math.log(x)
        w = lx - math.log(lx)
    return _halley(x, w)


def lambert_wm1(x: float) -> float:
    """Lower branch W-1 on [-1/e, 0); w*e^w = x with w <= -1."""
    if x < -_INV_E or x >= 0.0:
        if -_INV_E - _BOUNDARY_TOL <= x < -_INV_E:
            x = -_INV_E
        else:
            raise DomainError(f"lambert_wm1 requires x in [-1/e, 0), got {x}")
    q = math.e * x + 1.0
    if q <= 0.0:
        return -1.0
    if abs(x + _INV_E) < _SERIES_WINDOW:
        return _branch_series(-math.sqrt(2.0 * q))
    if x > -0.25:
        l1 = math.log(-x)
        w = l1 - math.log(-l1)
    else:
        w = -1.0 - math.sqrt(2.0 * q)
    return _halley(x, w)


@dataclass(frozen=True)
class ExponentContext:
    """Parameters shared by the exponent maps f and g.

    A_plus = 1 - 1{eta>0}/lambda1 and A_minus = 1 + 1{eta>0}/lambda1,
    so A_plus + A_minus = 2 always.
    """

    lambda1: float
    eta: float
    A_plus: float = field(init=False)
    A_minus: float = field(init=False)

    def __post_init__(self):
        if self.lambda1 <= 1.0:
            raise DomainError(f"lambda1 must exceed 1, got {self.lambda1}")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"eta must lie in [0, 1], got {self.eta}")
        shift = 1.0 / self.lambda1 if self.eta > 0.0 else 0.0
        object.__setattr__(self, "A_plus", 1.0 - shift)
        object.__setattr__(self, "A_minus", 1.0 + shift)


def f_exponent(c: float, ctx: ExponentContext) -> float:
    """f(c) = A+ log(A+/c) + c - A+, strictly decreasing on (0, A+)."""
    a = ctx.A_plus
    if not 0.0 < c < a:
        raise DomainError(f"f_exponent requires c in (0, {a}), got {c}")
    return a * math.log(a / c) + c - a


def g_exponent(c: float, ctx: ExponentContext) -> float:
    """g(c) = A- log(A-/c) + c - A-, strictly increasing on (A-, inf)."""
    a = ctx.A_minus
    if c <= a:
        raise DomainError(f"g_exponent requires c > {a}, got {c}")
    return a * math.log(a / c) + c - a


def f_inverse(r: float, ctx: ExponentContext) -> float:
    """Inverse of f via the principal W branch: -A+ W0(-e^{-(r+A+)/A+})."""
    if r <= 0.0:
        raise DomainError(f"f_inverse requires r > 0, got {r}")
    a = ctx.A_plus
    arg = -math.exp(-(r + a) / a)
    if arg == 0.0:
        # exp underflowed; W0(x) ~ x there, so fall back to the analytic
        # lower bound a*e^{-(r+a)/a}, which is asymptotically exact.
        c = a * math.exp(-(r + a) / a)
        if c == 0.0:
            raise OverflowError(
                f"f_inverse({r}) underflows double precision for A_plus={a}"
            )
        return c
    return -a * lambert_w0(arg)


def g_inverse(r: float, ctx: ExponentContext) -> float:
    """Inverse of g via the lower W branch: -A- W-1(-e^{-(r+A-)/A-})."""
    if r <= 0.0:
        raise DomainError(f"g_inverse requires r > 0, got {r}")
    a = ctx.A_minus
    arg = -math.exp(-(r + a) / a)
    if arg == 0.0:
        # exp underflowed (r/a > ~708); Newton on g(c) = r from the
        # analytic lower bound c = A- + r, which is already very close.
        c = a + r
        for _ in range(50):
            step = (g_exponent(c, ctx) - r) / (1.0 - a / c)
            c -= step
            if abs(step) <= 1e-14 * c:
                break
        return c
    return -a * lambert_wm1(arg)


def c1_c2(n: int, delta: float, eps: float, ctx: ExponentContext) -> tuple[float, float]:
    """Quantile-contraction factors sandwiching the winsorization thresholds.

    c1 = f^{-1}(log(6/delta)/(n*eps)) in (0, A+),
    c2 = g^{-1}(log(6/delta)/(n*eps)) in (A-, inf).
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    r = math.log(6.0 / delta) / (n * eps)
    return f_inverse(r, ctx), g_inverse(r, ctx)
