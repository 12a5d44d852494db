"""Generalized gradient projection engine.

One iteration maps the current point ``u`` to the prox of the penalty at
``u - s * K*(K u - f)``.  With a weighted l1 penalty this is iterative
soft-thresholding, with a joint-sparsity penalty it is block
thresholding, and with a ball indicator it is projected gradient descent.

Step sizes come from three rules: a constant ``s``, a bounded corridor
``[s_min, s_max]`` (the solver then uses ``s_max`` every step), or an
a-posteriori acceptance test ("condition B") that tries larger steps and
backs off until ``s * ||K d||^2 <= 2 (1 - delta) ||d||^2`` holds for the
trial displacement ``d``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import IterationTrace, TraceRow
from .errors import (
    DimensionMismatchError,
    InfeasibleStartError,
    SolverRuntimeError,
    StepSizeError,
)
from .operators import DENSE_EIG_MAX_DIM, operator_norm_sq, operator_norm_sq_dense
from .prox import JointSparsity, L1BallIndicator

#: Relative safety margin when validating step bounds against the
#: estimated ``||K||^2`` (the power-iteration estimate approaches the true
#: value from below).
_NORM_MARGIN = 1e-6


@dataclass
class Problem:
    """Data-fidelity-plus-penalty minimization instance.

    ``objective(u) = 0.5 * ||K u - f||^2 + Phi(u)`` with ``Phi`` given by
    the penalty object.
    """

    operator: object
    data: np.ndarray
    penalty: object
    truncation_dim: int = 0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != (self.operator.rows,):
            raise DimensionMismatchError(
                f"data of shape {self.data.shape} but operator has {self.operator.rows} rows"
            )
        if self.penalty.dim != self.operator.cols:
            raise DimensionMismatchError(
                f"penalty over {self.penalty.dim} coefficients but operator has "
                f"{self.operator.cols} columns"
            )
        if self.truncation_dim == 0:
            self.truncation_dim = self.operator.cols
        if self.truncation_dim != self.operator.cols:
            raise ValueError("truncation_dim must equal the operator column count")

    @property
    def dim(self):
        return self.operator.cols

    def residual(self, u):
        """``K u - f``."""
        return self.operator.apply(u) - self.data

    def smooth_value(self, u):
        return 0.5 * float(np.linalg.norm(self.residual(u)) ** 2)

    def objective(self, u):
        """``0.5 ||K u - f||^2 + Phi(u)`` (``inf`` outside the penalty domain)."""
        phi = self.penalty.value(u)
        if math.isinf(phi):
            return math.inf
        return self.smooth_value(u) + phi

    def gradient(self, u):
        """Gradient of the smooth part, ``K*(K u - f)``."""
        return self.operator.adjoint_apply(self.residual(u))

    def dual_vector(self, u):
        """``w = -K*(K u - f)``, the negative smooth gradient."""
        return -self.gradient(u)


@dataclass(frozen=True)
class ConstantStep:
    """Fixed step size ``s``; requires ``0 < s < 2 / ||K||^2``."""

    s: float


@dataclass(frozen=True)
class BoundedStep:
    """Steps confined to ``[s_min, s_max]`` with ``s_max < 2 / ||K||^2``.

    The solver takes ``s_max`` every iteration; ``s_min`` enters the rate
    certificates.
    """

    s_min: float
    s_max: float


@dataclass(frozen=True)
class ConditionB:
    """A-posteriori step acceptance with growth and halving.

    Trials start at ``growth`` times the previously accepted step (first
    trial: ``s_init``, default ``1 / ||K||^2``) and halve until
    ``s * ||K d||^2 <= 2 (1 - delta) ||d||^2`` holds, flooring at
    ``s_min``.  Validation requires ``s_min <= 2 (1 - delta) / ||K||^2``
    so the floored step always satisfies the test.
    """

    s_min: float
    delta: float
    growth: float = 1.5
    s_init: float | None = None


def step_size_cap(op_norm_sq):
    """``2 / ||K||^2`` with the convention ``inf`` for the zero operator."""
    if op_norm_sq == 0.0:
        return math.inf
    return 2.0 / op_norm_sq


def validate_rule(rule, op_norm_sq):
    """Raise StepSizeError when the rule violates its bounds for this operator."""
    cap = step_size_cap(op_norm_sq)
    if isinstance(rule, ConstantStep):
        if not 0 < rule.s < cap:
            raise StepSizeError(
                f"constant step s={rule.s} outside (0, {cap}) for ||K||^2={op_norm_sq}"
            )
    elif isinstance(rule, BoundedStep):
        if not 0 < rule.s_min <= rule.s_max:
            raise StepSizeError(
                f"need 0 < s_min <= s_max, got s_min={rule.s_min}, s_max={rule.s_max}"
            )
        if not rule.s_max < cap:
            raise StepSizeError(
                f"s_max={rule.s_max} must stay below 2/||K||^2 = {cap}"
            )
    elif isinstance(rule, ConditionB):
        if not rule.s_min > 0:
            raise StepSizeError(f"s_min must be positive, got {rule.s_min}")
        if not 0 < rule.delta < 1:
            raise StepSizeError(f"delta must lie in (0, 1), got {rule.delta}")
        if rule.growth <= 1:
            raise StepSizeError(f"growth factor must exceed 1, got {rule.growth}")
        if op_norm_sq > 0:
            safe_floor = 2.0 * (1.0 - rule.delta) / op_norm_sq
            if rule.s_min > safe_floor * (1.0 - _NORM_MARGIN):
                raise StepSizeError(
                    f"s_min={rule.s_min} too large for guaranteed acceptance; "
                    f"need s_min <= 2(1-delta)/||K||^2 = {safe_floor}"
                )
        if rule.s_init is not None and rule.s_init <= 0:
            raise StepSizeError(f"s_init must be positive, got {rule.s_init}")
    else:
        raise StepSizeError(f"unknown step-size rule {rule!r}")


def descent_coefficient(rule, op_norm_sq):
    """The delta with which each step is guaranteed to decrease the objective."""
    if isinstance(rule, ConditionB):
        return rule.delta
    s_max = rule.s if isinstance(rule, ConstantStep) else rule.s_max
    if op_norm_sq == 0.0:
        return 1.0
    return 1.0 - s_max * op_norm_sq / 2.0


def rule_bounds(rule):
    """``(s_min, s_max)`` of a rule; ``s_max`` is ``None`` for condition B."""
    if isinstance(rule, ConstantStep):
        return rule.s, rule.s
    if isinstance(rule, BoundedStep):
        return rule.s_min, rule.s_max
    return rule.s_min, None


@dataclass
class SolverState:
    """Current iterate with its cached residual ``K u - f``."""

    iterate: np.ndarray
    step_index: int
    last_step_size: float
    residual: np.ndarray


@dataclass
class StoppingRule:
    """Explicit stopping criteria; at least one is always active."""

    max_iters: int = 100_000
    step_tol: float = 1e-10
    gap_tol: float | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.step_tol < 0:
            raise ValueError(f"step_tol must be >= 0, got {self.step_tol}")
        if self.gap_tol is not None and self.gap_tol < 0:
            raise ValueError(f"gap_tol must be >= 0, got {self.gap_tol}")


@dataclass
class SolveResult:
    """Final state plus per-iteration trace and run metadata."""

    state: SolverState
    trace: IterationTrace
    stop_reason: str
    op_norm_sq: float
    delta: float
    rejected_trials: int = 0
    w_star_norm: float = 0.0
    reference: np.ndarray | None = None

    @property
    def iterate(self):
        return self.state.iterate

    @property
    def steps(self):
        return self.state.step_index


def _resolve_op_norm_sq(operator, op_norm_sq):
    if op_norm_sq is not None:
        return float(op_norm_sq)
    if operator.cols <= DENSE_EIG_MAX_DIM:
        return operator_norm_sq_dense(operator)
    return operator_norm_sq(operator)


class _StepEngine:
    """Shared per-iteration logic; tracks condition-B trial state."""

    def __init__(self, problem, rule, op_norm_sq):
        self.problem = problem
        self.rule = rule
        self.rejected = 0
        if isinstance(rule, ConditionB):
            if rule.s_init is not None:
                self.prev_accepted = rule.s_init
            elif op_norm_sq > 0:
                self.prev_accepted = 1.0 / op_norm_sq
            else:
                self.prev_accepted = 1.0

    def advance(self, state):
        """Compute the next iterate; returns (s, v, residual_v)."""
        p = self.problem
        u = state.iterate
        grad = p.operator.adjoint_apply(state.residual)
        rule = self.rule
        if isinstance(rule, ConstantStep):
            s = rule.s
        elif isinstance(rule, BoundedStep):
            s = rule.s_max
        else:
            return self._advance_condition_b(state, grad)
        v = p.penalty.prox(u - s * grad, s)
        return s, v, p.operator.apply(v) - p.data

    def _advance_condition_b(self, state, grad):
        p = self.problem
        rule = self.rule
        u = state.iterate
        trial = max(self.prev_accepted * rule.growth, rule.s_min)
        while True:
            v = p.penalty.prox(u - trial * grad, trial)
            resid_v = p.operator.apply(v) - p.data
            d = v - u
            # evaluate K d directly so the acceptance test is reproducible
            # bitwise by an independent recomputation
            kd = p.operator.apply(d)
            lhs = trial * float(kd @ kd)
            rhs = 2.0 * (1.0 - rule.delta) * float(d @ d)
            if lhs <= rhs:
                self.prev_accepted = trial
                return trial, v, resid_v
            self.rejected += 1
            if trial <= rule.s_min:
                raise StepSizeError(
                    f"condition B rejected the floor step s_min={rule.s_min}; "
                    "s_min exceeds 2(1-delta)/||K||^2 for this operator"
                )
            trial = max(trial / 2.0, rule.s_min)


def step(problem, state, rule, op_norm_sq=None):
    """Apply one iteration to ``state`` and return the successor state.

    For condition B a fresh trial state is used, so repeated calls are
    stateless; ``solve`` keeps the trial memory across iterations.
    """
    opn = _resolve_op_norm_sq(problem.operator, op_norm_sq)
    validate_rule(rule, opn)
    engine = _StepEngine(problem, rule, opn)
    s, v, resid_v = engine.advance(state)
    if not np.all(np.isfinite(v)):
        raise SolverRuntimeError(
            f"non-finite iterate at step {state.step_index}", state.step_index, state
        )
    return SolverState(
        iterate=v, step_index=state.step_index + 1, last_step_size=s, residual=resid_v
    )


def initial_state(problem, u0=None):
    """State holding ``u0`` (default: the zero vector) and its residual."""
    if u0 is None:
        u0 = np.zeros(problem.dim)
    u0 = np.asarray(u0, dtype=float)
    if u0.shape != (problem.dim,):
        raise DimensionMismatchError(
            f"initial point of shape {u0.shape}, expected ({problem.dim},)"
        )
    return SolverState(
        iterate=u0.copy(),
        step_index=0,
        last_step_size=math.nan,
        residual=problem.residual(u0),
    )


def _support(u):
    return tuple(int(k) for k in np.nonzero(u)[0])


def solve(
    problem,
    u0=None,
    rule=None,
    stop=None,
    trace_sink=None,
    reference=None,
    op_norm_sq=None,
):
    """Iterate to a minimizer, recording a per-step trace.

    Parameters
    ----------
    problem : Problem
    u0 : array, optional
        Starting point with finite penalty value; defaults to zero.
    rule : step-size rule, optional
        Defaults to the constant step ``1 / ||K||^2`` (or 1 for ``K = 0``).
    stop : StoppingRule, optional
    trace_sink : callable, optional
        Called with the initial state and then with every accepted state.
    reference : array, optional
        A known (near-)minimizer; enables the gap, distance and
        Bregman/Taylor columns of the trace and the ``gap_tol`` criterion.
    op_norm_sq : float, optional
        Squared operator norm to use for validation and the descent
        coefficient; computed if omitted.
    """
    opn = _resolve_op_norm_sq(problem.operator, op_norm_sq)
    if rule is None:
        rule = ConstantStep(1.0 / opn if opn > 0 else 1.0)
    validate_rule(rule, opn)
    if stop is None:
        stop = StoppingRule()
    state = initial_state(problem, u0)
    phi_u = problem.penalty.value(state.iterate)
    if math.isinf(phi_u):
        raise InfeasibleStartError("starting point has infinite penalty value")

    ref = None
    if reference is not None:
        ref = np.asarray(reference, dtype=float)
        if ref.shape != (problem.dim,):
            raise DimensionMismatchError(
                f"reference of shape {ref.shape}, expected ({problem.dim},)"
            )
        ref_resid = problem.residual(ref)
        ref_grad = problem.operator.adjoint_apply(ref_resid)  # F'(u*)
        ref_phi = problem.penalty.value(ref)
        ref_obj = 0.5 * float(ref_resid @ ref_resid) + ref_phi

    if trace_sink is not None:
        trace_sink(state)

    engine = _StepEngine(problem, rule, opn)
    delta = descent_coefficient(rule, opn)
    rows = []
    stop_reason = "max_iters"
    for n in range(stop.max_iters):
        u = state.iterate
        s, v, resid_v = engine.advance(state)
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(resid_v))):
            raise SolverRuntimeError(f"non-finite iterate at step {n}", n, state)
        phi_v = problem.penalty.value(v)
        grad_u = problem.operator.adjoint_apply(state.residual)
        diff = u - v
        descent = phi_u - phi_v + float(grad_u @ diff)
        obj_u = 0.5 * float(state.residual @ state.residual) + phi_u
        step_norm = float(np.linalg.norm(diff))

        gap = bregman = taylor = dist = None
        if ref is not None:
            gap = obj_u - ref_obj
            err = u - ref
            dist = float(np.linalg.norm(err))
            bregman = float(ref_grad @ err) + phi_u - ref_phi
            kerr = state.residual - ref_resid
            taylor = 0.5 * float(kerr @ kerr)

        rows.append(
            TraceRow(
                n=n,
                step_size=s,
                objective=obj_u,
                gap=gap,
                descent=descent,
                bregman=bregman,
                taylor=taylor,
                dist_to_ref=dist,
                support_size=int(np.count_nonzero(u)),
                step_norm=step_norm,
                support=_support(u),
            )
        )

        state = SolverState(iterate=v, step_index=n + 1, last_step_size=s, residual=resid_v)
        phi_u = phi_v
        if trace_sink is not None:
            trace_sink(state)

        if stop.step_tol > 0 and step_norm <= stop.step_tol:
            stop_reason = "step_tol"
            break
        if stop.gap_tol is not None and ref is not None:
            obj_v = 0.5 * float(resid_v @ resid_v) + phi_v
            if obj_v - ref_obj <= stop.gap_tol:
                stop_reason = "gap_tol"
                break

    w_star = problem.operator.adjoint_apply(state.residual)
    return SolveResult(
        state=state,
        trace=IterationTrace(rows=rows),
        stop_reason=stop_reason,
        op_norm_sq=opn,
        delta=delta,
        rejected_trials=engine.rejected,
        w_star_norm=float(np.linalg.norm(w_star)),
        reference=None if ref is None else ref.copy(),
    )


def solve_joint(problem, **kwargs):
    """``solve`` specialized to a joint-sparsity penalty (block thresholding)."""
    if not isinstance(problem.penalty, JointSparsity):
        raise ValueError("solve_joint requires a joint-sparsity penalty")
    return solve(problem, **kwargs)


def solve_ball(problem, **kwargs):
    """``solve`` specialized to the l1-ball indicator (projected gradient).

    The returned ``w_star_norm`` tells whether the data lies outside the
    image of the ball: a nonzero value at the limit indicates ``K u* != f``,
    the regime in which the linear-rate certificate applies.
    """
    if not isinstance(problem.penalty, L1BallIndicator):
        raise ValueError("solve_ball requires an l1-ball indicator penalty")
    return solve(problem, **kwargs)
