import math

import numpy as np
import pytest

from istalab import (
    BlockNorm,
    BoundedStep,
    ConditionB,
    ConstantStep,
    DenseOperator,
    InfeasibleStartError,
    JointSparsity,
    L1BallIndicator,
    Problem,
    StepSizeError,
    StoppingRule,
    WeightedL1,
    Weights,
    block_threshold,
    initial_state,
    operator_norm_sq_dense,
    optimality_residual,
    oracle_minimizer,
    soft_threshold,
    solve,
    solve_ball,
    solve_joint,
    step,
    validate_rule,
)
from conftest import random_weighted_problem


def one_d_problem():
    # closed form: K=[1], f=2, alpha=0.5 has minimizer 1.5
    return Problem(
        operator=DenseOperator([[1.0]]),
        data=np.array([2.0]),
        penalty=WeightedL1(Weights.constant(0.5, 1)),
    )


def collect_iterates(problem, **kwargs):
    states = []
    result = solve(problem, trace_sink=lambda st: states.append(st.iterate.copy()), **kwargs)
    return result, states


class TestObjectiveGradient:
    def test_objective_at_zero_is_half_data_norm(self, rng):
        p = random_weighted_problem(0, 6, 5)
        assert p.objective(np.zeros(5)) == pytest.approx(
            0.5 * np.linalg.norm(p.data) ** 2
        )

    def test_objective_hand_sum(self):
        p = Problem(
            operator=DenseOperator.identity(2),
            data=np.zeros(2),
            penalty=WeightedL1(Weights.constant(1.0, 2)),
        )
        assert p.objective(np.array([1.0, -1.0])) == pytest.approx(3.0)

    def test_indicator_infeasible_is_inf(self):
        p = Problem(
            operator=DenseOperator.identity(2),
            data=np.zeros(2),
            penalty=L1BallIndicator(Weights.constant(1.0, 2), radius=1.0),
        )
        assert p.objective(np.array([2.0, 2.0])) == math.inf

    def test_gradient_zero_at_data_preimage(self, rng):
        f = rng.standard_normal(3)
        p = Problem(
            operator=DenseOperator.identity(3),
            data=f,
            penalty=WeightedL1(Weights.constant(1.0, 3)),
        )
        np.testing.assert_allclose(p.gradient(f), np.zeros(3), atol=1e-15)

    def test_gradient_identity_zero_data(self, rng):
        p = Problem(
            operator=DenseOperator.identity(3),
            data=np.zeros(3),
            penalty=WeightedL1(Weights.constant(1.0, 3)),
        )
        u = rng.standard_normal(3)
        np.testing.assert_array_equal(p.gradient(u), u)

    def test_gradient_matches_finite_differences(self, rng):
        p = random_weighted_problem(7, 6, 4)
        u = rng.standard_normal(4)
        g = p.gradient(u)
        h = 1e-6
        for k in range(4):
            e = np.zeros(4)
            e[k] = h
            fd = (p.smooth_value(u + e) - p.smooth_value(u - e)) / (2 * h)
            assert g[k] == pytest.approx(fd, rel=1e-5, abs=1e-8)


class TestStepRules:
    def test_constant_rule_validated(self):
        p = one_d_problem()
        with pytest.raises(StepSizeError, match="outside"):
            solve(p, rule=ConstantStep(2.5))  # cap is 2/1 = 2
        with pytest.raises(StepSizeError):
            validate_rule(ConstantStep(-1.0), 1.0)

    def test_bounded_rule_validated(self):
        with pytest.raises(StepSizeError, match="s_min"):
            validate_rule(BoundedStep(0.5, 0.2), 1.0)
        with pytest.raises(StepSizeError, match="below"):
            validate_rule(BoundedStep(0.5, 2.0), 1.0)

    def test_condition_b_floor_validated(self):
        # s_min must not exceed 2(1-delta)/||K||^2
        with pytest.raises(StepSizeError, match="s_min"):
            validate_rule(ConditionB(s_min=1.5, delta=0.5), 1.0)
        validate_rule(ConditionB(s_min=0.9, delta=0.5), 1.0)

    def test_zero_operator_cap_is_infinite(self):
        p = Problem(
            operator=DenseOperator.zeros(2, 2),
            data=np.zeros(2),
            penalty=WeightedL1(Weights.constant(1.0, 2)),
        )
        res = solve(p, u0=np.array([0.4, -0.4]), rule=ConstantStep(5.0))
        np.testing.assert_array_equal(res.iterate, np.zeros(2))


class TestStep:
    def test_one_hand_step(self):
        p = one_d_problem()
        st = step(p, initial_state(p), ConstantStep(1.0))
        assert st.iterate[0] == pytest.approx(1.5)
        assert st.step_index == 1

    def test_fixed_point(self):
        p = one_d_problem()
        st = initial_state(p, np.array([1.5]))
        new = step(p, st, ConstantStep(1.0))
        assert abs(new.iterate[0] - 1.5) <= 1e-12

    def test_matches_straight_line_oracle(self, rng):
        p = random_weighted_problem(3, 4, 2)
        u = rng.standard_normal(2)
        s = 0.5 / operator_norm_sq_dense(p.operator)
        st = step(p, initial_state(p, u), ConstantStep(s))
        # independent one-step reimplementation
        A = p.operator.entries
        w = u - s * (A.T @ (A @ u - p.data))
        expect = np.sign(w) * np.maximum(np.abs(w) - s * p.penalty.weights.alpha, 0.0)
        np.testing.assert_allclose(st.iterate, expect, atol=1e-15)

    def test_residual_cached_consistently(self, rng):
        p = random_weighted_problem(4, 5, 3)
        st = step(p, initial_state(p), ConstantStep(0.3))
        np.testing.assert_allclose(st.residual, p.residual(st.iterate), atol=1e-12)


class TestSolve:
    def test_identity_one_step_closed_form(self, rng):
        f = rng.standard_normal(4)
        alpha = 0.3
        p = Problem(
            operator=DenseOperator.identity(4),
            data=f,
            penalty=WeightedL1(Weights.constant(alpha, 4)),
        )
        res = solve(p, rule=ConstantStep(1.0))
        expect = soft_threshold(f, np.full(4, alpha))
        np.testing.assert_allclose(res.iterate, expect, atol=1e-14)
        assert res.steps <= 2

    def test_one_d_limit(self):
        res = solve(one_d_problem(), rule=ConstantStep(1.0))
        assert res.iterate[0] == pytest.approx(1.5, abs=1e-10)

    def test_limit_matches_enumeration_oracle(self):
        p = random_weighted_problem(11, 6, 4)
        u_star = oracle_minimizer(p)
        res = solve(p, stop=StoppingRule(max_iters=200_000, step_tol=1e-13))
        assert np.linalg.norm(res.iterate - u_star) <= 1e-8

    def test_infeasible_start_rejected(self):
        p = Problem(
            operator=DenseOperator.identity(2),
            data=np.zeros(2),
            penalty=L1BallIndicator(Weights.constant(1.0, 2), radius=1.0),
        )
        with pytest.raises(InfeasibleStartError):
            solve(p, u0=np.array([3.0, 3.0]))

    def test_stop_reasons(self):
        p = one_d_problem()
        res = solve(p, stop=StoppingRule(max_iters=3, step_tol=0.0))
        assert res.stop_reason == "max_iters" and res.steps == 3
        res = solve(p, stop=StoppingRule(max_iters=100, step_tol=1e-8))
        assert res.stop_reason == "step_tol"
        res = solve(
            p,
            reference=np.array([1.5]),
            stop=StoppingRule(max_iters=100, step_tol=0.0, gap_tol=1e-12),
        )
        assert res.stop_reason == "gap_tol"

    def test_constant_and_bounded_bitwise_identical(self):
        p = random_weighted_problem(5, 8, 6)
        s = 0.8 / operator_norm_sq_dense(p.operator)
        stop = StoppingRule(max_iters=50, step_tol=0.0)
        res_a = solve(p, rule=ConstantStep(s), stop=stop)
        res_b = solve(p, rule=BoundedStep(s, s), stop=stop)
        np.testing.assert_array_equal(res_a.iterate, res_b.iterate)
        for ra, rb in zip(res_a.trace, res_b.trace):
            assert ra.objective == rb.objective
            assert ra.step_norm == rb.step_norm

    def test_reruns_are_bitwise_identical(self):
        p = random_weighted_problem(6, 8, 6)
        res_a = solve(p, stop=StoppingRule(max_iters=40, step_tol=0.0))
        res_b = solve(p, stop=StoppingRule(max_iters=40, step_tol=0.0))
        np.testing.assert_array_equal(res_a.iterate, res_b.iterate)


class TestDescentInvariants:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_descent_inequality_and_lower_bound(self, seed):
        p = random_weighted_problem(seed, 10, 7)
        L = operator_norm_sq_dense(p.operator)
        rule = BoundedStep(0.3 / L, 1.5 / L)
        res = solve(p, rule=rule, stop=StoppingRule(max_iters=300, step_tol=0.0), op_norm_sq=L)
        delta = res.delta
        assert delta == pytest.approx(1.0 - 1.5 / 2.0)
        objs = res.trace.column("objective")
        final_obj = p.objective(res.iterate)
        nxt = np.append(objs[1:], final_obj)
        for row, o_next in zip(res.trace, nxt):
            assert o_next <= row.objective - delta * row.descent + 1e-10
            assert row.descent >= row.step_norm**2 / row.step_size - 1e-10
        res.trace.check_invariants()

    def test_variational_inequality_at_reference(self):
        p = random_weighted_problem(13, 8, 5)
        u_star = oracle_minimizer(p)
        result, iterates = collect_iterates(
            p, stop=StoppingRule(max_iters=150, step_tol=0.0)
        )
        phi = p.penalty.value
        for n in range(len(iterates) - 1):
            u, v = iterates[n], iterates[n + 1]
            s = result.trace.rows[n].step_size
            lhs = phi(u_star) - phi(v) + p.gradient(u) @ (u_star - v)
            rhs = (u - v) @ (u_star - v) / s
            assert lhs >= rhs - 1e-10

    def test_monotone_distance_to_limit(self):
        p = random_weighted_problem(17, 9, 6)
        u_star = oracle_minimizer(p)
        res = solve(p, reference=u_star, stop=StoppingRule(max_iters=400, step_tol=0.0))
        d = res.trace.column("dist_to_ref")
        assert np.all(d[1:] <= d[:-1] + 1e-10)

    def test_gap_nonnegative_and_rt_identity_along_trace(self):
        p = random_weighted_problem(19, 8, 6)
        u_star = oracle_minimizer(p)
        res = solve(p, reference=u_star, stop=StoppingRule(max_iters=200, step_tol=0.0))
        for row in res.trace:
            assert row.gap >= -1e-10
            assert row.bregman + row.taylor == pytest.approx(row.gap, abs=1e-10)
            assert row.bregman >= -1e-12 and row.taylor >= -1e-12


class TestConditionB:
    def test_never_accepts_violating_step(self):
        p = random_weighted_problem(23, 10, 6)
        L = operator_norm_sq_dense(p.operator)
        rule = ConditionB(s_min=0.5 / L, delta=0.4)
        result, iterates = collect_iterates(
            p, rule=rule, stop=StoppingRule(max_iters=200, step_tol=0.0), op_norm_sq=L
        )
        A = p.operator.entries
        for n in range(len(iterates) - 1):
            d = iterates[n + 1] - iterates[n]
            s = result.trace.rows[n].step_size
            kd = A @ d
            assert s * float(kd @ kd) <= 2 * (1 - rule.delta) * float(d @ d)
            assert s >= rule.s_min

    def test_accepts_larger_steps_eventually(self):
        # strongly decaying spectrum lets accepted steps exceed the classical cap
        K = DenseOperator.diagonal([1.0, 0.25, 0.05])
        p = Problem(
            operator=K,
            data=np.array([1.0, 0.8, 0.6]),
            penalty=WeightedL1(Weights.constant(0.01, 3)),
        )
        rule = ConditionB(s_min=0.5, delta=0.5)
        res = solve(p, rule=rule, stop=StoppingRule(max_iters=400, step_tol=1e-12))
        cap = 2.0 / res.op_norm_sq
        assert max(res.trace.column("s_n")) > cap

    def test_descent_with_configured_delta(self):
        p = random_weighted_problem(29, 8, 5)
        rule = ConditionB(s_min=0.2 / operator_norm_sq_dense(p.operator), delta=0.3)
        res = solve(p, rule=rule, stop=StoppingRule(max_iters=150, step_tol=0.0))
        objs = res.trace.column("objective")
        final_obj = p.objective(res.iterate)
        nxt = np.append(objs[1:], final_obj)
        for row, o_next in zip(res.trace, nxt):
            assert o_next <= row.objective - rule.delta * row.descent + 1e-10


class TestSolveJoint:
    def test_block_size_one_matches_scalar_path(self):
        p_scalar = random_weighted_problem(31, 6, 4)
        weights = p_scalar.penalty.weights
        p_joint = Problem(
            operator=p_scalar.operator,
            data=p_scalar.data,
            penalty=JointSparsity(weights, BlockNorm(2, 1)),
        )
        stop = StoppingRule(max_iters=60, step_tol=0.0)
        res_s = solve(p_scalar, stop=stop)
        res_j = solve_joint(p_joint, stop=stop)
        np.testing.assert_allclose(res_j.iterate, res_s.iterate, atol=1e-14)

    def test_identity_one_step_block_threshold(self, rng):
        norm = BlockNorm(2, 2)
        weights = Weights.constant(0.4, 3)
        f = rng.standard_normal(6)
        p = Problem(
            operator=DenseOperator.identity(6),
            data=f,
            penalty=JointSparsity(weights, norm),
        )
        res = solve_joint(p, rule=ConstantStep(1.0))
        expect = block_threshold(f, weights.alpha, norm)
        np.testing.assert_allclose(res.iterate, expect, atol=1e-14)
        assert res.steps <= 2

    def test_random_limit_satisfies_optimality(self, rng):
        norm = BlockNorm(2, 3)
        weights = Weights.from_alpha(0.15 + 0.1 * rng.random(4))
        K = DenseOperator(rng.standard_normal((14, 12)) / np.sqrt(14))
        u_true = np.zeros(12)
        u_true[:6] = rng.standard_normal(6)
        f = K.apply(u_true) + 0.02 * rng.standard_normal(14)
        p = Problem(operator=K, data=f, penalty=JointSparsity(weights, norm))
        res = solve_joint(p, stop=StoppingRule(max_iters=300_000, step_tol=1e-13))
        assert optimality_residual(p, res.iterate) <= 1e-8

    def test_requires_joint_penalty(self):
        with pytest.raises(ValueError, match="joint"):
            solve_joint(one_d_problem())


class TestSolveBall:
    def test_zero_data_gives_zero(self, rng):
        K = DenseOperator(rng.standard_normal((4, 3)))
        p = Problem(
            operator=K,
            data=np.zeros(4),
            penalty=L1BallIndicator(Weights.constant(1.0, 3), radius=1.0),
        )
        u0 = np.array([0.3, -0.2, 0.1])
        res = solve_ball(p, u0=u0, stop=StoppingRule(max_iters=5_000, step_tol=1e-14))
        np.testing.assert_allclose(res.iterate, np.zeros(3), atol=1e-10)

    def test_one_d_boundary(self):
        p = Problem(
            operator=DenseOperator([[1.0]]),
            data=np.array([3.0]),
            penalty=L1BallIndicator(Weights.constant(1.0, 1), radius=1.0),
        )
        res = solve_ball(p, stop=StoppingRule(max_iters=100, step_tol=1e-14))
        assert res.iterate[0] == pytest.approx(1.0, abs=1e-12)
        assert res.w_star_norm > 0.1  # data outside the image of the ball

    def test_random_limit_satisfies_optimality(self, rng):
        K = DenseOperator(rng.standard_normal((6, 5)) / np.sqrt(6))
        alpha = 0.5 + rng.random(5)
        f = 4.0 * K.apply(rng.standard_normal(5))  # far outside K(Omega)
        p = Problem(
            operator=K, data=f, penalty=L1BallIndicator(Weights.from_alpha(alpha))
        )
        res = solve_ball(p, stop=StoppingRule(max_iters=200_000, step_tol=1e-13))
        assert optimality_residual(p, res.iterate) <= 1e-8
        assert res.w_star_norm > 0

    def test_requires_ball_penalty(self):
        with pytest.raises(ValueError, match="ball"):
            solve_ball(one_d_problem())
