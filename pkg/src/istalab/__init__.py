"""istalab: iterative soft-thresholding solvers with rate certificates.

A solver library plus experiment CLI for l1-regularized linear inverse
problems at finite truncation: soft-thresholding / block-thresholding /
ball-projection iterations, per-step convergence diagnostics, and
instance-computable linear-rate certificates.
"""

from .diagnostics import (
    BallSupportAnalysis,
    IterationTrace,
    RateCertificate,
    RateFit,
    SublinearReport,
    SupportAnalysis,
    TraceRow,
    ball_support_analysis,
    bregman_distance,
    certificate_compact,
    certificate_fbi,
    certificate_strict_pattern,
    fit_rate,
    optimality_residual,
    sublinear_check,
    support_analysis,
    taylor_distance,
)
from .errors import (
    CertificateError,
    ConfigError,
    DimensionMismatchError,
    EnumerationBudgetError,
    InfeasibleStartError,
    IstaLabError,
    OptimalityError,
    OracleError,
    PowerIterationError,
    SolverRuntimeError,
    StepSizeError,
)
from .operators import (
    DenseOperator,
    FbiReport,
    SpectralReport,
    fbi_check,
    load_matrix,
    load_vector,
    operator_norm_sq,
    operator_norm_sq_dense,
    save_matrix,
    save_vector,
    spectral_report,
)
from .oracle import OracleResult, enumerate_minimizer, oracle_minimizer
from .prox import (
    BlockNorm,
    JointSparsity,
    L1BallIndicator,
    WeightedL1,
    Weights,
    block_threshold,
    project_weighted_l1_ball,
    prox_step,
    soft_threshold,
)
from .solvers import (
    BoundedStep,
    ConditionB,
    ConstantStep,
    Problem,
    SolveResult,
    SolverState,
    StoppingRule,
    descent_coefficient,
    initial_state,
    solve,
    solve_ball,
    solve_joint,
    step,
    step_size_cap,
    validate_rule,
)

__version__ = "0.1.0"
