"""Dense linear operators and their spectral / injectivity queries.

Everything is a finite truncation: an operator is a real ``rows x cols``
matrix acting on length-``cols`` coefficient vectors.  Besides plain
matrix-vector products this module answers the questions the rate
certificates ask of an operator: its squared norm, the head/tail spectral
profile (smallest squared singular value on leading coordinate blocks,
largest on trailing ones), and injectivity of column submatrices up to a
given support size.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    EnumerationBudgetError,
    PowerIterationError,
)

#: Largest dimension for which the dense eigensolver path is used by default.
DENSE_EIG_MAX_DIM = 64

#: Default cap on the number of column subsets enumerated by ``fbi_check``.
SUBSET_ENUMERATION_BUDGET = 50_000


class DenseOperator:
    """Immutable dense matrix with adjoint and spectral queries.

    Parameters
    ----------
    entries : array_like
        Real matrix, shape ``(rows, cols)``; all entries must be finite.
    """

    def __init__(self, entries):
        arr = np.array(entries, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"operator entries must be 2-dimensional, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"operator must have at least one row and column, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("operator entries must all be finite")
        arr.setflags(write=False)
        self._entries = arr

    @property
    def entries(self):
        return self._entries

    @property
    def rows(self):
        return self._entries.shape[0]

    @property
    def cols(self):
        return self._entries.shape[1]

    def apply(self, u):
        """Matrix-vector product ``K u`` for a length-``cols`` vector."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.cols,):
            raise DimensionMismatchError(
                f"apply expects a length-{self.cols} vector, got shape {u.shape}"
            )
        return self._entries @ u

    def adjoint_apply(self, y):
        """Adjoint product ``K* y`` for a length-``rows`` vector."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.rows,):
            raise DimensionMismatchError(
                f"adjoint_apply expects a length-{self.rows} vector, got shape {y.shape}"
            )
        return self._entries.T @ y

    def adjoint(self):
        """The transposed operator as a new ``DenseOperator``."""
        return DenseOperator(self._entries.T)

    def gram(self):
        """The ``cols x cols`` Gram matrix ``K* K``."""
        return self._entries.T @ self._entries

    def __repr__(self):
        return f"DenseOperator(rows={self.rows}, cols={self.cols})"

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, rows, cols):
        return cls(np.zeros((rows, cols)))

    @classmethod
    def diagonal(cls, diag):
        return cls(np.diag(np.asarray(diag, dtype=float)))


def operator_norm_sq(K, tol=1e-10, max_iters=20_000):
    """Largest eigenvalue of ``K* K`` by deterministic power iteration.

    The starting vector is the normalized all-ones vector, so repeated
    calls give bit-identical results.  If that vector happens to lie in
    the kernel of the Gram matrix, the iteration restarts from the basis
    vector with the largest Gram diagonal (still deterministic).

    Raises
    ------
    PowerIterationError
        If the Rayleigh quotient has not stabilized to relative ``tol``
        within ``max_iters`` products; the error carries the last estimate.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    g = K.gram()
    n = K.cols
    v = np.ones(n) / math.sqrt(n)
    w = g @ v
    norm_w = np.linalg.norm(w)
    if norm_w == 0.0:
        # all-ones start lies in the kernel; retry from the dominant diagonal
        diag = np.diag(g)
        if np.max(diag) == 0.0:
            return 0.0  # Gram is PSD with zero trace, hence zero operator
        v = np.zeros(n)
        v[int(np.argmax(diag))] = 1.0
        w = g @ v
        norm_w = np.linalg.norm(w)
    est = float(v @ w)
    for _ in range(max_iters):
        v = w / norm_w
        w = g @ v
        norm_w = np.linalg.norm(w)
        new_est = float(v @ w)
        if abs(new_est - est) <= tol * abs(new_est):
            return new_est
        if norm_w == 0.0:
            return 0.0
        est = new_est
    raise PowerIterationError(
        f"power iteration did not reach relative tolerance {tol} "
        f"within {max_iters} iterations (last estimate {est})",
        last_estimate=est,
        iterations=max_iters,
    )


def operator_norm_sq_dense(K):
    """Exact largest eigenvalue of ``K* K`` via a dense symmetric eigensolver."""
    return float(np.linalg.eigvalsh(K.gram())[-1])


@dataclass
class SpectralReport:
    """Head/tail spectral profile of an operator.

    ``sigma[k-1]`` is the smallest eigenvalue of the Gram matrix of the
    first ``k-1`` columns (``+inf`` for ``k = 1``, the infimum over the
    empty coordinate block); ``mu[k-1]`` is the largest eigenvalue of the
    Gram matrix of columns ``k..cols``.  Both lists are 1-indexed by ``k``
    in that sense.
    """

    operator_norm_sq: float
    sigma: list = field(default_factory=list)
    mu: list = field(default_factory=list)
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.operator_norm_sq < 0:
            raise ValueError("operator_norm_sq must be non-negative")
        if len(self.sigma) != len(self.mu):
            raise ValueError("sigma and mu must have equal length")
        sig, mu, tol = self.sigma, self.mu, self.tolerance
        for k in range(len(sig) - 1):
            if not sig[k + 1] <= sig[k] + tol:
                raise ValueError(f"sigma must be non-increasing, violated at k={k + 1}")
            if not mu[k + 1] <= mu[k] + tol:
                raise ValueError(f"mu must be non-increasing, violated at k={k + 1}")
        for k, s in enumerate(sig):
            if math.isfinite(s) and not s <= mu[0] + tol:
                raise ValueError(f"sigma[{k}] exceeds mu[0] beyond tolerance")
        if mu and not mu[0] <= self.operator_norm_sq + tol:
            raise ValueError("mu[0] exceeds operator_norm_sq beyond tolerance")

    def k_max(self):
        return len(self.sigma)


def spectral_report(K, k_max, tol=1e-9):
    """Head/tail Gram eigenvalue profile for ``k = 1 .. k_max``.

    Dense eigendecompositions per block; intended for desk-scale operators.
    """
    if not 1 <= k_max <= K.cols:
        raise ValueError(f"k_max must be in [1, {K.cols}], got {k_max}")
    A = K.entries
    sigma = []
    mu = []
    for k in range(1, k_max + 1):
        if k == 1:
            sigma.append(math.inf)
        else:
            head = A[:, : k - 1]
            sigma.append(float(np.linalg.eigvalsh(head.T @ head)[0]))
        tail = A[:, k - 1 :]
        mu.append(float(np.linalg.eigvalsh(tail.T @ tail)[-1]))
    return SpectralReport(operator_norm_sq=mu[0], sigma=sigma, mu=mu, tolerance=tol)


@dataclass
class FbiReport:
    """Smallest singular values of column submatrices up to a support size.

    ``passes`` certifies injectivity only up to the checked ``order`` (or
    the explicitly supplied supports).
    """

    order: int
    min_singular_by_support: dict
    passes: bool
    threshold: float

    def __post_init__(self):
        if self.threshold <= 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        expected = all(v > self.threshold for v in self.min_singular_by_support.values())
        if self.passes != expected:
            raise ValueError("passes flag inconsistent with recorded singular values")

    def value_for(self, support):
        return self.min_singular_by_support.get(tuple(sorted(support)))


def fbi_check(K, order, supports=None, threshold=1e-8, budget=SUBSET_ENUMERATION_BUDGET):
    """Finite-basis-injectivity check up to a given support size.

    Verifies that every column submatrix with up to ``order`` columns is
    injective (smallest singular value above ``threshold``).

    Parameters
    ----------
    K : DenseOperator
    order : int
        Largest support size to enumerate (ignored sizes above ``cols``).
    supports : iterable of index subsets, optional
        Explicit list of supports to check instead of enumerating.
    threshold : float
        A submatrix counts as injective when its smallest singular value
        exceeds this.
    budget : int
        Cap on the number of enumerated subsets.

    Raises
    ------
    EnumerationBudgetError
        If full enumeration would exceed ``budget``; pass explicit
        ``supports`` in that case.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    n = K.cols
    if supports is None:
        sizes = range(1, min(order, n) + 1)
        total = sum(math.comb(n, r) for r in sizes)
        if total > budget:
            raise EnumerationBudgetError(
                f"enumerating {total} subsets exceeds the budget of {budget}; "
                "pass an explicit `supports` list"
            )
        supports = itertools.chain.from_iterable(
            itertools.combinations(range(n), r) for r in sizes
        )
    A = K.entries
    values = {}
    for subset in supports:
        key = tuple(sorted(set(int(i) for i in subset)))
        if not key:
            raise ValueError("empty support subset")
        if key[0] < 0 or key[-1] >= n:
            raise ValueError(f"support {key} out of range for {n} columns")
        sub = A[:, key]
        values[key] = float(np.linalg.svd(sub, compute_uv=False)[-1])
    passes = all(v > threshold for v in values.values())
    return FbiReport(
        order=order, min_singular_by_support=values, passes=passes, threshold=threshold
    )


def save_matrix(path, arr, header=None):
    """Write a matrix as plain-text CSV, one row per line.

    Floats are written with ``repr`` so a round trip is exact.
    """
    arr = np.atleast_2d(np.asarray(arr, dtype=float))
    with open(path, "w", encoding="ascii") as fh:
        if header is not None:
            fh.write(",".join(str(h) for h in header) + "\n")
        for row in arr:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def load_matrix(path):
    """Read a plain-text CSV matrix; an optional header line is auto-detected."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")

    def parse(line):
        return [float(tok) for tok in line.split(",")]

    try:
        first = parse(lines[0])
        rows = [first]
        start = 1
    except ValueError:
        rows = []
        start = 1
        if len(lines) == 1:
            raise ValueError(f"{path}: no numeric rows found")
    rows.extend(parse(ln) for ln in lines[start:])
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    return np.array(rows, dtype=float)


def save_vector(path, vec):
    """Write a vector as a one-column CSV."""
    vec = np.asarray(vec, dtype=float).reshape(-1, 1)
    save_matrix(path, vec)


def load_vector(path):
    """Read a vector stored as a single CSV row or column."""
    m = load_matrix(path)
    if 1 not in m.shape:
        raise ValueError(f"{path}: expected a single row or column, got shape {m.shape}")
    return m.reshape(-1)
