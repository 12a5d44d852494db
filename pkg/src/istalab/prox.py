"""Proximity operators and projections.

Three penalty families share one prox interface:

* weighted l1 (componentwise soft-thresholding),
* joint sparsity (per-block thresholding through the dual-norm ball
  projection),
* the indicator of a weighted l1 ball (Euclidean projection).

All operations are pure functions of their inputs and reentrant.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

#: Relative slack used when deciding feasibility for the ball indicator.
BALL_FEASIBILITY_RTOL = 1e-12


@dataclass(frozen=True)
class Weights:
    """Penalty weight sequence with a positive uniform lower bound."""

    alpha: np.ndarray
    lower_bound: float

    def __post_init__(self):
        arr = np.array(self.alpha, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "alpha", arr)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("alpha must be a non-empty 1-d array")
        if not self.lower_bound > 0:
            raise ValueError(f"lower_bound must be positive, got {self.lower_bound}")
        if not np.all(arr >= self.lower_bound):
            raise ValueError("every weight must be >= lower_bound")

    def __len__(self):
        return self.alpha.size

    @classmethod
    def from_alpha(cls, alpha):
        arr = np.asarray(alpha, dtype=float)
        return cls(alpha=arr, lower_bound=float(np.min(arr)))

    @classmethod
    def constant(cls, value, n):
        return cls(alpha=np.full(n, float(value)), lower_bound=float(value))


@dataclass(frozen=True)
class BlockNorm:
    """Norm exponent and block size for vector-valued coefficients.

    ``q`` must be 1, 2 or ``math.inf``; the dual exponent follows the
    usual 1 <-> inf pairing.
    """

    q: float
    block_size: int

    def __post_init__(self):
        if self.q not in (1, 2, math.inf):
            raise ValueError(f"unsupported block norm exponent q={self.q}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")

    @property
    def dual_q(self):
        return {1: math.inf, 2: 2, math.inf: 1}[self.q]

    def value(self, x):
        """The q-norm of one block."""
        x = np.asarray(x, dtype=float)
        if self.q == 1:
            return float(np.sum(np.abs(x)))
        if self.q == 2:
            return float(np.linalg.norm(x))
        return float(np.max(np.abs(x))) if x.size else 0.0

    def dual_value(self, x):
        """The dual-norm of one block."""
        return BlockNorm(self.dual_q, self.block_size).value(x)

    def project_dual_ball(self, x, radius):
        """Euclidean projection of one block onto the dual-norm ball."""
        x = np.asarray(x, dtype=float)
        if radius < 0:
            raise ValueError(f"radius must be >= 0, got {radius}")
        if self.dual_q == math.inf:
            return np.clip(x, -radius, radius)
        if self.dual_q == 2:
            nrm = float(np.linalg.norm(x))
            if nrm <= radius:
                return x.copy()
            return x * (radius / nrm)
        # dual_q == 1
        if radius == 0.0:
            return np.zeros_like(x)
        return project_weighted_l1_ball(x, Weights.constant(1.0, x.size), radius)


def soft_threshold(w, thresholds):
    """Componentwise shrinkage ``sign(w) * max(|w| - t, 0)``.

    Entries with ``|w_k| <= t_k`` come out as exact zeros.
    """
    w = np.asarray(w, dtype=float)
    t = np.asarray(thresholds, dtype=float)
    if w.shape != t.shape:
        raise DimensionMismatchError(
            f"soft_threshold got values of shape {w.shape} but thresholds of shape {t.shape}"
        )
    if np.any(t < 0):
        raise ValueError("thresholds must be non-negative")
    return np.sign(w) * np.maximum(np.abs(w) - t, 0.0)


def block_threshold(w, thresholds, norm):
    """Per-block thresholding ``x - P(x)`` with ``P`` the dual-ball projection.

    ``w`` holds ``len(thresholds)`` contiguous blocks of ``norm.block_size``
    entries each.  For q = 2 this is block soft-thresholding; for q = 1 it
    reduces to the scalar soft threshold; for q = inf the dual ball is an
    l1 ball.
    """
    w = np.asarray(w, dtype=float)
    t = np.asarray(thresholds, dtype=float)
    if t.ndim != 1:
        raise ValueError("thresholds must be a 1-d array with one entry per block")
    if np.any(t < 0):
        raise ValueError("thresholds must be non-negative")
    nb = t.size
    size = norm.block_size
    if w.shape != (nb * size,):
        raise DimensionMismatchError(
            f"block_threshold expects {nb} blocks of size {size} "
            f"(flat length {nb * size}), got shape {w.shape}"
        )
    out = np.empty_like(w)
    for i in range(nb):
        x = w[i * size : (i + 1) * size]
        # subtracting the actual projection keeps the Moreau identity exact
        out[i * size : (i + 1) * size] = x - norm.project_dual_ball(x, t[i])
    return out


def project_weighted_l1_ball(u, weights, radius):
    """Euclidean projection onto ``{v : sum_k alpha_k |v_k| <= radius}``.

    Feasible inputs are returned unchanged.  Otherwise the projection is
    ``sign(u_k) * max(|u_k| - tau * alpha_k, 0)`` where ``tau`` solves
    ``sum_k alpha_k * max(|u_k| - tau * alpha_k, 0) = radius``; the root is
    found by exact pivoting over the sorted breakpoints ``|u_k| / alpha_k``
    (no iterative search, so results are bit-reproducible).
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    u = np.asarray(u, dtype=float)
    a = weights.alpha
    if u.shape != a.shape:
        raise DimensionMismatchError(
            f"vector of shape {u.shape} incompatible with {a.size} weights"
        )
    absu = np.abs(u)
    if float(a @ absu) <= radius:
        return u.copy()
    if not np.any(absu):
        return np.zeros_like(u)
    z = absu / a  # breakpoints of the pivot function
    order = np.argsort(-z, kind="stable")
    zs = z[order]
    cum_au = np.cumsum((a * absu)[order])
    cum_a2 = np.cumsum((a * a)[order])
    # h(j) = zs[j-1]*cum_a2[j-1] - cum_au[j-1] + radius is non-increasing;
    # the active set is the largest prefix with h > 0
    h = zs * cum_a2 - cum_au + radius
    j = int(np.nonzero(h > 0)[0][-1])
    tau = (cum_au[j] - radius) / cum_a2[j]
    return np.sign(u) * np.maximum(absu - tau * a, 0.0)


class WeightedL1:
    """Penalty ``sum_k alpha_k |u_k|``."""

    kind = "weighted_l1"

    def __init__(self, weights):
        self.weights = weights

    @property
    def dim(self):
        return len(self.weights)

    @property
    def alpha_min(self):
        return self.weights.lower_bound

    def value(self, u):
        u = np.asarray(u, dtype=float)
        self._check(u)
        return float(self.weights.alpha @ np.abs(u))

    def prox(self, w, s):
        self._check(np.asarray(w, dtype=float))
        return soft_threshold(w, s * self.weights.alpha)

    def _check(self, u):
        if u.shape != (self.dim,):
            raise DimensionMismatchError(
                f"{self.kind} penalty over {self.dim} coefficients, got shape {u.shape}"
            )

    def __repr__(self):
        return f"WeightedL1(dim={self.dim}, alpha_min={self.alpha_min})"


class JointSparsity:
    """Penalty ``sum_k alpha_k |u_k|_q`` over contiguous blocks ``u_k``."""

    kind = "joint"

    def __init__(self, weights, norm):
        self.weights = weights
        self.norm = norm

    @property
    def num_blocks(self):
        return len(self.weights)

    @property
    def dim(self):
        return self.num_blocks * self.norm.block_size

    @property
    def alpha_min(self):
        return self.weights.lower_bound

    def blocks(self, u):
        return np.asarray(u, dtype=float).reshape(self.num_blocks, self.norm.block_size)

    def value(self, u):
        u = np.asarray(u, dtype=float)
        self._check(u)
        return float(
            sum(
                a * self.norm.value(x)
                for a, x in zip(self.weights.alpha, self.blocks(u))
            )
        )

    def prox(self, w, s):
        self._check(np.asarray(w, dtype=float))
        return block_threshold(w, s * self.weights.alpha, self.norm)

    def norm_equivalence(self):
        """Constants ``(c0, C0)`` with ``c0 |x|_2 <= |x|_q <= C0 |x|_2``."""
        n = self.norm.block_size
        if self.norm.q == 2:
            return 1.0, 1.0
        if self.norm.q == 1:
            return 1.0, math.sqrt(n)
        return 1.0 / math.sqrt(n), 1.0

    def _check(self, u):
        if u.shape != (self.dim,):
            raise DimensionMismatchError(
                f"{self.kind} penalty of {self.num_blocks} blocks x {self.norm.block_size}, "
                f"got shape {u.shape}"
            )

    def __repr__(self):
        return (
            f"JointSparsity(blocks={self.num_blocks}, "
            f"block_size={self.norm.block_size}, q={self.norm.q})"
        )


class L1BallIndicator:
    """Indicator of the weighted l1 ball ``{u : sum_k alpha_k |u_k| <= radius}``."""

    kind = "l1_ball_indicator"

    def __init__(self, weights, radius=1.0):
        if not radius > 0:
            raise ValueError(f"radius must be positive, got {radius}")
        self.weights = weights
        self.radius = float(radius)

    @property
    def dim(self):
        return len(self.weights)

    @property
    def alpha_min(self):
        return self.weights.lower_bound

    def weighted_mass(self, u):
        u = np.asarray(u, dtype=float)
        self._check(u)
        return float(self.weights.alpha @ np.abs(u))

    def value(self, u):
        mass = self.weighted_mass(u)
        if mass > self.radius * (1.0 + BALL_FEASIBILITY_RTOL):
            return math.inf
        return 0.0

    def prox(self, w, s):
        # the prox of an indicator is the projection, independent of s
        self._check(np.asarray(w, dtype=float))
        return project_weighted_l1_ball(w, self.weights, self.radius)

    def _check(self, u):
        if u.shape != (self.dim,):
            raise DimensionMismatchError(
                f"{self.kind} penalty over {self.dim} coefficients, got shape {u.shape}"
            )

    def __repr__(self):
        return f"L1BallIndicator(dim={self.dim}, radius={self.radius})"


def prox_step(u, grad, s, penalty):
    """One proximal-gradient update: the prox of the penalty at ``u - s * grad``."""
    if not s > 0:
        raise ValueError(f"step size must be positive, got {s}")
    u = np.asarray(u, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if u.shape != grad.shape:
        raise DimensionMismatchError(
            f"iterate of shape {u.shape} but gradient of shape {grad.shape}"
        )
    return penalty.prox(u - s * grad, s)
