"""Momentum-SGD scheduling laboratory.

SHB/NSHB optimizers under dynamic learning-rate and batch-size schedules,
closed-form convergence-bound evaluation, synthetic problems with exact
constants, and a multi-seed harness that verifies the bounds empirically.
"""

from .schedules import (
    AdmissibilityReport,
    InadmissibleSchedule,
    LrSchedule,
    MomentumTooLarge,
    PhasePlan,
    ScheduleError,
    ScheduleTable,
    build_constant_bs_table,
    build_increasing_bs_table,
    growth_constant,
    table_from_csv,
    table_to_csv,
    validate_admissible,
)
from .problems import (
    IterateOutsideCertifiedBox,
    LogCoshProblem,
    QuadraticMeanProblem,
    empirical_minibatch_variance,
    full_gradient_norm_sq,
    minibatch_gradient,
)
from .optim import NumericalDivergence, OptimizerState, RunTrace, batch_indices, run, step
from .theory import (
    TheoremConstants,
    TheoryReport,
    corollary_bounds,
    descent_inequality_rhs,
    lyapunov_coefficient,
    lyapunov_value,
    theorem1_rhs,
)
from .harness import (
    AggregateReport,
    AuditReport,
    ExperimentConfig,
    ProblemSpec,
    RateFit,
    ScheduleSpec,
    lyapunov_descent_audit,
    rate_fit,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityReport",
    "AggregateReport",
    "AuditReport",
    "ExperimentConfig",
    "InadmissibleSchedule",
    "IterateOutsideCertifiedBox",
    "LogCoshProblem",
    "LrSchedule",
    "MomentumTooLarge",
    "NumericalDivergence",
    "OptimizerState",
    "PhasePlan",
    "ProblemSpec",
    "QuadraticMeanProblem",
    "RateFit",
    "RunTrace",
    "ScheduleError",
    "ScheduleSpec",
    "ScheduleTable",
    "TheoremConstants",
    "TheoryReport",
    "batch_indices",
    "build_constant_bs_table",
    "build_increasing_bs_table",
    "corollary_bounds",
    "descent_inequality_rhs",
    "empirical_minibatch_variance",
    "full_gradient_norm_sq",
    "growth_constant",
    "lyapunov_coefficient",
    "lyapunov_descent_audit",
    "lyapunov_value",
    "minibatch_gradient",
    "rate_fit",
    "run",
    "run_experiment",
    "step",
    "table_from_csv",
    "table_to_csv",
    "theorem1_rhs",
    "validate_admissible",
]
