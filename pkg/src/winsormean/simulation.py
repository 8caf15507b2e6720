"""Monte Carlo benchmark harness: data-generating processes, the
quantile-replacement adversary, deterministic per-replication random
streams, and aggregation into MAE tables and box-plot records.

Replication r always draws from the stream seeded by (master_seed, r), and
within a replication the draw order is fixed (data first, then adversary
positions), so results do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy import integrate, stats

from . import estimators as est
from .adaptive import AdaptivePlan, NoFeasibleLevel
from .estimators import EstimatorParams, NOT_IMPLEMENTABLE
from .special import DomainError

__all__ = [
    "ParetoMixture",
    "StudentT",
    "NoAdversary",
    "ReplaceWithQuantile",
    "WinsorizedSpec",
    "SampleMeanSpec",
    "TrimmedSpec",
    "Lm21Spec",
    "MedianOfMeansSpec",
    "AdaptiveSpec",
    "SimConfig",
    "EstimatorResult",
    "SimResult",
    "MomentDoesNotExist",
    "sample_pareto",
    "contaminate",
    "run_replication",
    "run_study",
    "summary_csv",
    "raw_errors_csv",
]

OK = "ok"
NOT_IMPLEMENTABLE_STATUS = "not_implementable"
NO_FEASIBLE_LEVEL_STATUS = "no_feasible_level"


class MomentDoesNotExist(ValueError):
    """The requested absolute central moment of the distribution is infinite."""


# --------------------------------------------------------------------------
# Data-generating processes
# --------------------------------------------------------------------------


def sample_pareto(t: float, gamma: float, u: float) -> float:
    """Inverse-cdf Pareto draw t*(1-u)^(-1/gamma) from u in (0,1)."""
    return t * (1.0 - u) ** (-1.0 / gamma)


class ParetoMixture(BaseModel):
    """Mean-zero half-atom / half-shifted-Pareto mixture whose mean and
    median differ by b = gamma*t/(2*(gamma-1))."""

    kind: Literal["pareto_mixture"] = "pareto_mixture"
    t: float = Field(gt=0.0)
    gamma: float = Field(gt=1.0)

    @property
    def b(self) -> float:
        return self.gamma * self.t / (2.0 * (self.gamma - 1.0))

    @property
    def mean(self) -> float:
        return 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.uniform(size=size)
        heads = rng.uniform(size=size) < 0.5
        values = np.where(
            heads, -self.b, self.t * (1.0 - u) ** (-1.0 / self.gamma) - self.b
        )
        return values

    def quantile(self, p: float) -> float:
        if not 0.0 < p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {p}")
        if p <= 0.5:
            return -self.b  # the atom carries mass 1/2
        return self.t * (2.0 * (1.0 - p)) ** (-1.0 / self.gamma) - self.b

    def sigma_m(self, m: float) -> float:
        """m-th absolute central moment root, by adaptive quadrature.

        The Pareto part is integrated after the power substitution
        v = w^(gamma/(gamma-m)), which turns the slowly-decaying tail into a
        bounded integrand on (0, 1].
        """
        if m >= self.gamma:
            raise MomentDoesNotExist(
                f"moment m={m} does not exist for gamma={self.gamma}"
            )
        q = self.gamma / (self.gamma - m)
        b = self.b

        def integrand(w: float) -> float:
            return q * abs(self.t - b * w ** (1.0 / (self.gamma - m))) ** m

        pareto_part, _ = integrate.quad(
            integrand, 0.0, 1.0, epsrel=1e-9, epsabs=0.0, limit=200
        )
        return (0.5 * b**m + 0.5 * pareto_part) ** (1.0 / m)


class StudentT(BaseModel):
    """Student-t distribution with df degrees of freedom (mean 0 for df > 1)."""

    kind: Literal["student_t"] = "student_t"
    df: float = Field(gt=0.0)

    @property
    def mean(self) -> float:
        return 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # Ratio construction: standard normal over sqrt(chi^2/df), one stream.
        z = rng.standard_normal(size)
        chi2 = rng.chisquare(self.df, size)
        return z / np.sqrt(chi2 / self.df)

    def quantile(self, p: float) -> float:
        if not 0.0 < p < 1.0:
            raise DomainError(f"p must lie in (0, 1), got {p}")
        return float(stats.t.ppf(p, self.df))

    def sigma_m(self, m: float) -> float:
        """m-th absolute moment root via quantile-space quadrature; the
        substitution u = 1 - 0.5*w^(df/(df-m)) bounds the tail integrand."""
        if m >= self.df:
            raise MomentDoesNotExist(f"moment m={m} does not exist for df={self.df}")
        q = self.df / (self.df - m)

        def integrand(w: float) -> float:
            u = 1.0 - 0.5 * w**q
            return 0.5 * q * w ** (q - 1.0) * abs(stats.t.ppf(u, self.df)) ** m

        half, _ = integrate.quad(
            integrand, 0.0, 1.0, epsrel=1e-9, epsabs=0.0, limit=200
        )
        return (2.0 * half) ** (1.0 / m)


Distribution = Annotated[
    Union[ParetoMixture, StudentT], Field(discriminator="kind")
]


# --------------------------------------------------------------------------
# Adversary
# --------------------------------------------------------------------------


class NoAdversary(BaseModel):
    kind: Literal["none"] = "none"

    @property
    def fraction(self) -> float:
        return 0.0


class ReplaceWithQuantile(BaseModel):
    """Replaces floor(fraction*n) uniformly chosen observations by a fixed
    population quantile of the uncontaminated distribution."""

    kind: Literal["replace_with_quantile"] = "replace_with_quantile"
    fraction: float = Field(ge=0.0, le=1.0)
    quantile_p: float = Field(gt=0.0, lt=1.0)


Adversary = Annotated[Union[NoAdversary, ReplaceWithQuantile], Field(discriminator="kind")]


def contaminate(
    xs: np.ndarray,
    adv: NoAdversary | ReplaceWithQuantile,
    dist,
    rng: np.random.Generator,
) -> tuple[np.ndarray, int]:
    """Apply the adversary; returns the corrupted sample and the exact
    number of altered observations."""
    if isinstance(adv, NoAdversary):
        return xs, 0
    n = xs.size
    count = est.floor_index(adv.fraction * n)
    if count == 0:
        return xs, 0
    positions = rng.choice(n, size=count, replace=False)
    out = xs.copy()
    out[positions] = dist.quantile(adv.quantile_p)
    return out, count


# --------------------------------------------------------------------------
# Estimator descriptors
# --------------------------------------------------------------------------


class WinsorizedSpec(BaseModel):
    name: Literal["winsorized"] = "winsorized"
    label: str = ""
    lambda1: float = 1.01
    lambda2: float = 0.2
    eta: float = 0.0

    def default_label(self) -> str:
        return f"winsorized_{self.lambda2:g}"


class SampleMeanSpec(BaseModel):
    name: Literal["sample_mean"] = "sample_mean"
    label: str = ""

    def default_label(self) -> str:
        return "sample_mean"


class TrimmedSpec(BaseModel):
    """Trimmed mean; eps defaults to the shared winsorized clipping fraction
    (lambda1*eta + lambda2*log(6/delta)/n) so comparisons share a budget."""

    name: Literal["trimmed"] = "trimmed"
    label: str = ""
    lambda1: float = 1.01
    lambda2: float = 0.2
    eta: float = 0.0
    eps: float | None = None

    def default_label(self) -> str:
        return "trimmed"


class Lm21Spec(BaseModel):
    name: Literal["lm21"] = "lm21"
    label: str = ""
    eta: float = 0.0

    def default_label(self) -> str:
        return "lm21"


class MedianOfMeansSpec(BaseModel):
    name: Literal["median_of_means"] = "median_of_means"
    label: str = ""
    blocks: int | None = None

    def default_label(self) -> str:
        return "median_of_means"


class AdaptiveSpec(BaseModel):
    """Adaptive estimator; sigma_m defaults to the true value computed from
    the configured distribution (the paper's known-sigma setting)."""

    name: Literal["adaptive"] = "adaptive"
    label: str = ""
    lambda1: float = 1.5
    lambda2: float = 0.2
    rho: float = 0.5
    sigma_m: float | None = None
    variant: Literal["midpoint", "grid"] = "midpoint"

    def default_label(self) -> str:
        return "adaptive" if self.variant == "midpoint" else "adaptive_grid"


EstimatorSpec = Annotated[
    Union[
        WinsorizedSpec,
        SampleMeanSpec,
        TrimmedSpec,
        Lm21Spec,
        MedianOfMeansSpec,
        AdaptiveSpec,
    ],
    Field(discriminator="name"),
]


class SimConfig(BaseModel):
    """Full description of a Monte Carlo study."""

    n: int = Field(ge=1)
    m: float = Field(ge=1.0)
    delta: float = Field(gt=0.0, lt=1.0)
    distribution: Distribution
    adversary: Adversary = NoAdversary()
    estimators: list[EstimatorSpec]
    replications: int = Field(ge=1)
    master_seed: int = Field(ge=0)


# --------------------------------------------------------------------------
# Study plan: everything data-independent, compiled once
# --------------------------------------------------------------------------


@dataclass
class _Task:
    label: str
    kind: str
    eps: float = 0.0
    blocks: int = 0
    eta: float = 0.0
    plan: AdaptivePlan | None = None
    variant: str = "midpoint"
    implementable: bool = True


class StudyPlan:
    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.dist = cfg.distribution
        self.mu = self.dist.mean
        self.tasks: list[_Task] = []
        seen: set[str] = set()
        for spec in cfg.estimators:
            task = self._compile(spec)
            if task.label in seen:
                raise ValueError(f"duplicate estimator label {task.label!r}")
            seen.add(task.label)
            self.tasks.append(task)

    def _shared_eps(self, lambda1: float, lambda2: float, eta: float) -> float:
        params = EstimatorParams(
            lambda1=lambda1, lambda2=lambda2, delta=self.cfg.delta, eta=eta,
            n=self.cfg.n,
        )
        return est.epsilon_of_eta(params)

    def _compile(self, spec) -> _Task:
        label = spec.label or spec.default_label()
        cfg = self.cfg
        if isinstance(spec, WinsorizedSpec):
            eps = self._shared_eps(spec.lambda1, spec.lambda2, spec.eta)
            return _Task(label=label, kind="winsorized", eps=eps,
                         implementable=0.0 < eps <= 0.5)
        if isinstance(spec, SampleMeanSpec):
            return _Task(label=label, kind="sample_mean")
        if isinstance(spec, TrimmedSpec):
            eps = spec.eps if spec.eps is not None else self._shared_eps(
                spec.lambda1, spec.lambda2, spec.eta
            )
            k = max(1, est.ceil_index(eps * cfg.n))
            return _Task(label=label, kind="trimmed", eps=eps,
                         implementable=0.0 < eps < 0.5 and 2 * k < cfg.n)
        if isinstance(spec, Lm21Spec):
            ok = est.lm21_implementable(cfg.n, spec.eta, cfg.delta)
            return _Task(label=label, kind="lm21", eta=spec.eta, implementable=ok)
        if isinstance(spec, MedianOfMeansSpec):
            blocks = spec.blocks or est.default_block_count(cfg.n, cfg.delta)
            return _Task(label=label, kind="median_of_means", blocks=blocks)
        if isinstance(spec, AdaptiveSpec):
            sigma = spec.sigma_m
            if sigma is None:
                sigma = self.dist.sigma_m(cfg.m)
            try:
                plan = AdaptivePlan(
                    n=cfg.n, sigma_m=sigma, m=cfg.m, rho=spec.rho,
                    delta=cfg.delta, lambda1=spec.lambda1, lambda2=spec.lambda2,
                )
            except NoFeasibleLevel:
                plan = None
            return _Task(label=label, kind="adaptive", plan=plan,
                         variant=spec.variant, implementable=plan is not None)
        raise ValueError(f"unknown estimator spec {spec!r}")

    def replicate(self, rep_index: int) -> list[tuple[str, float | None, str]]:
        """One replication: per-estimator (label, error, status) records."""
        cfg = self.cfg
        rng = np.random.default_rng(
            np.random.SeedSequence((cfg.master_seed, rep_index))
        )
        xs = self.dist.sample(rng, cfg.n)
        corrupted, _ = contaminate(xs, cfg.adversary, self.dist, rng)
        sorted_values = np.sort(corrupted)
        records = []
        for task in self.tasks:
            if not task.implementable:
                records.append((task.label, None, NOT_IMPLEMENTABLE_STATUS))
                continue
            if task.kind == "winsorized":
                value = est.winsorized_mean_sorted(sorted_values, task.eps)
            elif task.kind == "sample_mean":
                value = float(corrupted.mean())
            elif task.kind == "trimmed":
                n = corrupted.size
                k = max(1, est.ceil_index(task.eps * n))
                value = float(sorted_values[k : n - k].mean())
            elif task.kind == "lm21":
                value = est.lm21_winsorized_mean(corrupted, task.eta, cfg.delta)
                if value is NOT_IMPLEMENTABLE:
                    records.append((task.label, None, NOT_IMPLEMENTABLE_STATUS))
                    continue
            elif task.kind == "median_of_means":
                value = est.median_of_means(corrupted, cfg.delta, blocks=task.blocks)
            elif task.kind == "adaptive":
                try:
                    result = task.plan.evaluate(sorted_values)
                except NoFeasibleLevel:
                    records.append((task.label, None, NO_FEASIBLE_LEVEL_STATUS))
                    continue
                value = (
                    result.estimate_midpoint
                    if task.variant == "midpoint"
                    else result.estimate_grid
                )
            else:  # pragma: no cover
                raise AssertionError(task.kind)
            records.append((task.label, value - self.mu, OK))
        return records


def run_replication(cfg: SimConfig, rep_index: int) -> list[tuple[str, float | None, str]]:
    """One self-contained replication (compiles the study plan each call)."""
    return StudyPlan(cfg).replicate(rep_index)


# --------------------------------------------------------------------------
# Aggregation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimatorResult:
    label: str
    mae: float | None
    quantiles: tuple[float, float, float, float, float]  # q05..q95 of error
    failures: int
    successes: int


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    estimators: tuple[EstimatorResult, ...]
    raw_errors: dict[str, list[tuple[int, float | None, str]]] | None


def _replicate_chunk(cfg_json: str, reps: list[int]):
    plan = StudyPlan(SimConfig.model_validate_json(cfg_json))
    return [plan.replicate(r) for r in reps]


def run_study(cfg: SimConfig, workers: int = 1, keep_raw: bool = False) -> SimResult:
    """Run all replications and aggregate. The output is a pure function of
    the configuration, independent of the worker count."""
    reps = cfg.replications
    if workers <= 1:
        plan = StudyPlan(cfg)
        all_records = [plan.replicate(r) for r in range(reps)]
    else:
        cfg_json = cfg.model_dump_json()
        chunks = [list(range(start, reps, workers)) for start in range(workers)]
        chunks = [c for c in chunks if c]
        with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
            results = list(pool.map(_replicate_chunk, [cfg_json] * len(chunks), chunks))
        all_records = [None] * reps
        for chunk, chunk_records in zip(chunks, results):
            for r, rec in zip(chunk, chunk_records):
                all_records[r] = rec

    labels = [rec[0] for rec in all_records[0]]
    per_label: dict[str, list[float]] = {lab: [] for lab in labels}
    failures = {lab: 0 for lab in labels}
    for records in all_records:
        for label, error, status in records:
            if status == OK:
                per_label[label].append(error)
            else:
                failures[label] += 1

    summaries = []
    for label in labels:
        errors = np.asarray(per_label[label])
        if errors.size:
            mae = float(np.abs(errors).mean())
            qs = tuple(
                float(v) for v in np.quantile(errors, [0.05, 0.25, 0.5, 0.75, 0.95])
            )
        else:
            mae = None
            qs = (math.nan,) * 5
        summaries.append(
            EstimatorResult(
                label=label,
                mae=mae,
                quantiles=qs,
                failures=failures[label],
                successes=int(errors.size),
            )
        )

    raw = None
    if keep_raw:
        raw = {lab: [] for lab in labels}
        for r, records in enumerate(all_records):
            for label, error, status in records:
                raw[label].append((r, error, status))
    return SimResult(config=cfg, estimators=tuple(summaries), raw_errors=raw)


# --------------------------------------------------------------------------
# CSV rendering (shortest round-trip decimals, RFC-4180)
# --------------------------------------------------------------------------


def _fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def summary_csv(result: SimResult) -> str:
    cfg = result.config
    eta_min = cfg.adversary.fraction if hasattr(cfg.adversary, "fraction") else 0.0
    lines = ["n,m,eta_min,estimator,mae,q05,q25,q50,q75,q95,failures,replications,seed"]
    for r in result.estimators:
        q05, q25, q50, q75, q95 = r.quantiles
        lines.append(
            ",".join(
                [
                    str(cfg.n),
                    _fmt(cfg.m),
                    _fmt(eta_min),
                    r.label,
                    _fmt(r.mae),
                    _fmt(q05),
                    _fmt(q25),
                    _fmt(q50),
                    _fmt(q75),
                    _fmt(q95),
                    str(r.failures),
                    str(cfg.replications),
                    str(cfg.master_seed),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def raw_errors_csv(result: SimResult) -> str:
    if result.raw_errors is None:
        raise ValueError("study was run without keep_raw=True")
    lines = ["rep,estimator,error,status"]
    for label, rows in result.raw_errors.items():
        for rep, error, status in rows:
            lines.append(f"{rep},{label},{_fmt(error)},{status}")
    return "\n".join(lines) + "\n"
