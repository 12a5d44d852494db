"""Exact minimizer by sign-pattern enumeration.

For a weighted l1 problem in up to a dozen coefficients, every candidate
minimizer is characterized by its sign pattern in {-, 0, +}^n: on the
support the stationarity system ``K_S* K_S u_S = K_S* f - alpha_S sigma_S``
must hold with consistent signs, and off the support the dual vector must
stay inside its box.  Enumerating all patterns and keeping the feasible
candidate with least objective gives the global minimizer up to
linear-solver accuracy.  Used as the independent reference for solver
runs and rate fits.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationBudgetError, OracleError
from .prox import WeightedL1

#: Largest coefficient count enumerated (3^n patterns).
ORACLE_MAX_DIM = 12


@dataclass
class OracleResult:
    minimizer: np.ndarray
    objective: float
    support: tuple
    patterns_checked: int
    singular_skipped: int
    subgradient_rejected: int


def enumerate_minimizer(problem, max_dim=ORACLE_MAX_DIM, tol=1e-9):
    """Full enumeration record; see ``oracle_minimizer`` for the vector."""
    penalty = problem.penalty
    if not isinstance(penalty, WeightedL1):
        raise OracleError("sign-pattern enumeration applies to the weighted l1 penalty only")
    n = problem.dim
    if n > max_dim:
        raise EnumerationBudgetError(
            f"{3 ** n} sign patterns for {n} coefficients exceeds the budget "
            f"(max_dim={max_dim})"
        )
    A = problem.operator.entries
    f = problem.data
    alpha = penalty.weights.alpha

    best = None
    best_obj = problem.objective(np.zeros(n))
    best_u = np.zeros(n)
    singular = 0
    rejected = 0
    checked = 0
    for pattern in itertools.product((-1.0, 0.0, 1.0), repeat=n):
        checked += 1
        sigma = np.array(pattern)
        support = np.nonzero(sigma)[0]
        if support.size == 0:
            u = np.zeros(n)
        else:
            As = A[:, support]
            rhs = As.T @ f - alpha[support] * sigma[support]
            try:
                us = np.linalg.solve(As.T @ As, rhs)
            except np.linalg.LinAlgError:
                singular += 1
                continue
            if np.any(us * sigma[support] <= 0.0):
                continue  # candidate leaves the assumed orthant
            u = np.zeros(n)
            u[support] = us
        w = -(A.T @ (A @ u - f))
        off = np.setdiff1d(np.arange(n), support, assume_unique=True)
        if np.any(np.abs(w[off]) > alpha[off] + tol):
            rejected += 1
            continue
        obj = problem.objective(u)
        if best is None or obj < best_obj:
            best = u
            best_obj = obj
            best_u = u
    if best is None:
        # every nontrivial pattern failed; zero is the only valid candidate
        best_u = np.zeros(n)
        best_obj = problem.objective(best_u)
    return OracleResult(
        minimizer=best_u,
        objective=float(best_obj),
        support=tuple(int(k) for k in np.nonzero(best_u)[0]),
        patterns_checked=checked,
        singular_skipped=singular,
        subgradient_rejected=rejected,
    )


def oracle_minimizer(problem, max_dim=ORACLE_MAX_DIM, tol=1e-9):
    """The exact minimizer vector by sign-pattern enumeration."""
    return enumerate_minimizer(problem, max_dim=max_dim, tol=tol).minimizer
