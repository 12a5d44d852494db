from pathlib import Path

import numpy as np
import pytest

from istalab import DenseOperator, Problem, WeightedL1, Weights

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def gaussian_operator(rng, rows, cols, scale=None):
    if scale is None:
        scale = 1.0 / np.sqrt(rows)
    return DenseOperator(scale * rng.standard_normal((rows, cols)))


def random_weighted_problem(seed, rows, cols, alpha_scale=0.2, noise=0.05):
    """Seeded instance whose minimizer typically has a nontrivial support."""
    rng = np.random.default_rng(seed)
    K = gaussian_operator(rng, rows, cols)
    u_true = np.zeros(cols)
    support = rng.choice(cols, size=max(1, cols // 3), replace=False)
    u_true[support] = rng.standard_normal(support.size)
    f = K.apply(u_true) + noise * rng.standard_normal(rows)
    alpha = alpha_scale * (0.8 + 0.4 * rng.random(cols))
    penalty = WeightedL1(Weights.from_alpha(alpha))
    return Problem(operator=K, data=f, penalty=penalty)


def duplicate_column_strict_instance(alpha=0.5):
    """Non-FBI operator (two identical columns off the support) whose
    minimizer is known in closed form and has a strict sparsity pattern.

    The data is built so the dual vector hits +/-alpha exactly on the
    support {0, 1} and stays strictly inside elsewhere.
    """
    rng = np.random.default_rng(7)
    base = rng.standard_normal((4, 3))
    A = np.column_stack([base, base[:, 2]])  # columns 2 and 3 identical
    u_star = np.zeros(4)
    u_star[0] = 0.9
    u_star[1] = -0.7
    Ks = A[:, [0, 1]]
    z = Ks @ np.linalg.solve(Ks.T @ Ks, alpha * np.array([1.0, -1.0]))
    f = A @ u_star + z
    K = DenseOperator(A)
    w_off = np.abs(A.T @ z)[2:]
    assert np.all(w_off < alpha * 0.99), "construction lost its strict margin"
    problem = Problem(operator=K, data=f, penalty=WeightedL1(Weights.constant(alpha, 4)))
    return problem, u_star


def diagonal_decay_problem(dim=8, rate=0.5, alpha=0.05, seed=3):
    """Compact-style diagonal operator with unit-norm data."""
    K = DenseOperator.diagonal(rate ** np.arange(dim))
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(dim)
    f /= np.linalg.norm(f)
    return Problem(operator=K, data=f, penalty=WeightedL1(Weights.constant(alpha, dim)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
