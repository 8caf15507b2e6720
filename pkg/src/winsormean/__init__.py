"""Robust mean estimation under heavy tails and adversarial contamination:
winsorized means with data-driven clipping levels, finite-sample error
bounds, a Lepski-style adaptive estimator, and a Monte Carlo benchmark
harness with a FastAPI service and CLI on top.
"""

from .special import (
    DomainError,
    ExponentContext,
    c1_c2,
    f_exponent,
    f_inverse,
    g_exponent,
    g_inverse,
    h_minus,
    h_plus,
    lambert_w0,
    lambert_wm1,
)
from .estimators import (
    EstimatorParams,
    FeasibilityReport,
    NOT_IMPLEMENTABLE,
    NotImplementable,
    ceil_index,
    check_feasibility,
    clamp,
    default_block_count,
    epsilon_of_eta,
    floor_index,
    lm21_epsilon,
    lm21_implementable,
    lm21_winsorized_mean,
    median_of_means,
    order_statistic,
    sample_mean,
    trimmed_mean,
    winsorized_mean,
    winsorized_mean_sorted,
)
from .bounds import (
    BoundConstants,
    ConstantsOverflowError,
    bound_constants,
    quantile_mean_bound,
    theorem1_bound,
    theorem2_bound,
)
from .adaptive import (
    AdaptivePlan,
    AdaptiveResult,
    LepskiGrid,
    LevelInterval,
    NoFeasibleLevel,
    adaptive_estimate,
    build_grid,
    eps_A,
    B_of,
    eta_min_of,
)
from .simulation import (
    AdaptiveSpec,
    EstimatorResult,
    Lm21Spec,
    MedianOfMeansSpec,
    MomentDoesNotExist,
    NoAdversary,
    ParetoMixture,
    ReplaceWithQuantile,
    SampleMeanSpec,
    SimConfig,
    SimResult,
    StudentT,
    TrimmedSpec,
    WinsorizedSpec,
    contaminate,
    raw_errors_csv,
    run_replication,
    run_study,
    summary_csv,
)

__version__ = "1.0.0"
