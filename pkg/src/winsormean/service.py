"""HTTP service exposing the estimation library: point estimation on
supplied data, error-bound evaluation, feasibility checks, and full Monte
Carlo studies. The CLI drives these endpoints in-process by default."""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import bounds, estimators as est
from .adaptive import build_grid
from .bounds import ConstantsOverflowError
from .simulation import SimConfig, run_study, raw_errors_csv, summary_csv
from .special import DomainError

app = FastAPI(title="winsormean", version="1.0.0")


class EstimateRequest(BaseModel):
    values: list[float] = Field(min_length=1)
    lambda1: float = 1.01
    lambda2: float = 0.2
    delta: float = 0.01
    eta: float = 0.0
    eps: float | None = None  # explicit clipping fraction overrides the rule
    sigma_m: float | None = None
    m: float | None = None


class EstimateResponse(BaseModel):
    n: int
    eps: float
    simple_ok: bool
    lambert_ok: bool
    implementable: bool
    alpha_hat: float | None
    beta_hat: float | None
    estimate: float | None
    bound: float | None


class BoundRequest(BaseModel):
    m: float = Field(ge=1.0)
    lambda1: float = Field(gt=1.0)
    lambda2: float = Field(gt=0.0)
    sigma_m: float = Field(ge=0.0)
    n: int = Field(ge=1)
    delta: float = Field(gt=0.0, lt=1.0)
    eta: float = Field(ge=0.0, lt=0.5, default=0.0)
    rho: float | None = Field(default=None, gt=0.0, lt=1.0)
    eta_min: float | None = Field(default=None, ge=0.0)


class BoundResponse(BaseModel):
    frak_l: float
    frak_u: float
    frak_A: float
    frak_B: float
    frak_C: float
    eta_term_zero: bool
    theorem1_bound: float
    theorem2_bound: float | None


class FeasibleRequest(BaseModel):
    n: int = Field(ge=1)
    delta: float = Field(gt=0.0, lt=1.0)
    lambda1: float = Field(gt=1.0)
    lambda2: float = Field(gt=0.0)
    eta: float = Field(ge=0.0, default=0.0)


class FeasibleResponse(BaseModel):
    eps: float
    simple_lhs: float
    simple_ok: bool
    lambert_lhs: float
    lambert_ok: bool
    implementable: bool
    lm21_eps: float
    lm21_implementable: bool


class SimulateRequest(BaseModel):
    config: SimConfig
    workers: int = Field(ge=1, le=64, default=1)
    keep_raw: bool = False


class EstimatorSummary(BaseModel):
    label: str
    mae: float | None
    q05: float | None
    q25: float | None
    q50: float | None
    q75: float | None
    q95: float | None
    failures: int
    successes: int


class SimulateResponse(BaseModel):
    estimators: list[EstimatorSummary]
    summary_csv: str
    raw_errors_csv: str | None


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/estimate", response_model=EstimateResponse)
def estimate(req: EstimateRequest) -> EstimateResponse:
    xs = np.asarray(req.values, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise HTTPException(status_code=422, detail="values must all be finite")
    n = xs.size
    try:
        params = est.EstimatorParams(
            lambda1=req.lambda1, lambda2=req.lambda2, delta=req.delta,
            eta=req.eta, n=n,
        )
        report = est.check_feasibility(params)
    except DomainError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    eps = req.eps if req.eps is not None else report.eps

    alpha = beta = value = bound = None
    if 0.0 < eps <= 0.5:
        sorted_values = np.sort(xs)
        k_lo = max(1, est.ceil_index(eps * n))
        k_hi = est.ceil_index((1.0 - eps) * n)
        alpha = float(sorted_values[k_lo - 1])
        beta = float(sorted_values[k_hi - 1])
        value = est.winsorized_mean_sorted(sorted_values, eps)
        if req.sigma_m is not None and req.m is not None:
            try:
                bound = bounds.theorem1_bound(
                    sigma_m=req.sigma_m, m=req.m, eta=req.eta, n=n,
                    delta=req.delta, lambda1=req.lambda1, lambda2=req.lambda2,
                )
            except (DomainError, ConstantsOverflowError) as exc:
                raise HTTPException(status_code=422, detail=str(exc))

    return EstimateResponse(
        n=n,
        eps=eps,
        simple_ok=report.simple_ok,
        lambert_ok=report.lambert_ok,
        implementable=report.implementable and 0.0 < eps <= 0.5,
        alpha_hat=alpha,
        beta_hat=beta,
        estimate=value,
        bound=bound,
    )


@app.post("/bound", response_model=BoundResponse)
def bound(req: BoundRequest) -> BoundResponse:
    try:
        consts = bounds.bound_constants(req.m, req.lambda1, req.lambda2)
        b1 = bounds.theorem1_bound(
            sigma_m=req.sigma_m, m=req.m, eta=req.eta, n=req.n,
            delta=req.delta, lambda1=req.lambda1, lambda2=req.lambda2,
        )
        b2 = None
        if req.rho is not None:
            eta_min = req.eta_min if req.eta_min is not None else 0.0
            grid = build_grid(req.rho, req.delta, req.n)
            b2 = bounds.theorem2_bound(
                sigma_m=req.sigma_m, m=req.m, eta_min=eta_min, n=req.n,
                delta=req.delta, lambda1=req.lambda1, lambda2=req.lambda2,
                rho=req.rho, g_max=grid.g_max,
            )
    except (DomainError, ConstantsOverflowError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return BoundResponse(
        frak_l=consts.frak_l,
        frak_u=consts.frak_u,
        frak_A=consts.frak_A,
        frak_B=consts.frak_B,
        frak_C=consts.frak_C,
        eta_term_zero=req.eta == 0.0,
        theorem1_bound=b1,
        theorem2_bound=b2,
    )


@app.post("/feasible", response_model=FeasibleResponse)
def feasible(req: FeasibleRequest) -> FeasibleResponse:
    try:
        params = est.EstimatorParams(
            lambda1=req.lambda1, lambda2=req.lambda2, delta=req.delta,
            eta=req.eta, n=req.n,
        )
        report = est.check_feasibility(params)
    except DomainError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return FeasibleResponse(
        eps=report.eps,
        simple_lhs=report.simple_lhs,
        simple_ok=report.simple_ok,
        lambert_lhs=report.lambert_lhs,
        lambert_ok=report.lambert_ok,
        implementable=report.implementable,
        lm21_eps=est.lm21_epsilon(req.n, req.eta, req.delta),
        lm21_implementable=est.lm21_implementable(req.n, req.eta, req.delta),
    )


@app.post("/simulate", response_model=SimulateResponse)
def simulate(req: SimulateRequest) -> SimulateResponse:
    try:
        result = run_study(req.config, workers=req.workers, keep_raw=req.keep_raw)
    except (DomainError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    rows = []
    for r in result.estimators:
        q = [None if math.isnan(v) else v for v in r.quantiles]
        rows.append(
            EstimatorSummary(
                label=r.label, mae=r.mae, q05=q[0], q25=q[1], q50=q[2],
                q75=q[3], q95=q[4], failures=r.failures, successes=r.successes,
            )
        )
    return SimulateResponse(
        estimators=rows,
        summary_csv=summary_csv(result),
        raw_errors_csv=raw_errors_csv(result) if req.keep_raw else None,
    )
