"""Convergence diagnostics and rate certificates.

This module evaluates every quantity the solver's convergence theory is
built on: the per-step descent value, the objective gap to a reference
minimizer, the Bregman-like distance ``R`` and the quadratic remainder
``T``, dual-vector support analysis (active set, strictness, the margin
``rho``), and three kinds of instance-computable rate certificates:

* ``certificate_fbi``: constants from the Bregman/Taylor lower bound when
  the operator is injective on the active support;
* ``certificate_strict_pattern``: the asymptotic contraction factor of
  the affine iteration that takes over once the support freezes;
* ``certificate_compact``: fully a-priori constants from the head/tail
  spectral profile of a compact (decaying) operator, closed form.

``fit_rate`` estimates the empirical geometric rate from a trace so the
certificates can be checked against actual runs.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateError, OptimalityError
from .operators import DENSE_EIG_MAX_DIM, operator_norm_sq, operator_norm_sq_dense
from .prox import JointSparsity, L1BallIndicator, WeightedL1

#: Relative tolerance deciding membership in the active set
#: (``|w*_k| >= alpha_k * (1 - ACTIVE_SET_RTOL)``).
ACTIVE_SET_RTOL = 1e-8

#: Column order of the per-iteration CSV.
CSV_COLUMNS = (
    "n",
    "s_n",
    "objective",
    "r_n",
    "D_s",
    "R",
    "T",
    "dist_to_ref",
    "support_size",
    "step_norm",
)


@dataclass
class TraceRow:
    """Quantities recorded at iterate ``u^n`` for the step ``n -> n+1``."""

    n: int
    step_size: float
    objective: float
    gap: float | None
    descent: float
    bregman: float | None
    taylor: float | None
    dist_to_ref: float | None
    support_size: int
    step_norm: float
    support: tuple | None = None


_FIELD_BY_COLUMN = {
    "n": "n",
    "s_n": "step_size",
    "objective": "objective",
    "r_n": "gap",
    "D_s": "descent",
    "R": "bregman",
    "T": "taylor",
    "dist_to_ref": "dist_to_ref",
    "support_size": "support_size",
    "step_norm": "step_norm",
}


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


@dataclass
class IterationTrace:
    """Per-iteration record of a solver run."""

    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def column(self, name):
        """Column as a float array; missing optional entries become NaN."""
        attr = _FIELD_BY_COLUMN[name]
        out = np.empty(len(self.rows))
        for i, row in enumerate(self.rows):
            v = getattr(row, attr)
            out[i] = math.nan if v is None else float(v)
        return out

    def series(self, attr):
        """List of ``(n, value)`` pairs for a row attribute (value may be None)."""
        return [(row.n, getattr(row, attr)) for row in self.rows]

    def support_stabilization_step(self):
        """First step from which the recorded support never changes again.

        Uses the exact support sets when present, otherwise falls back to
        the support sizes.
        """
        if not self.rows:
            return 0
        if all(row.support is not None for row in self.rows):
            seq = [row.support for row in self.rows]
        else:
            seq = [row.support_size for row in self.rows]
        final = seq[-1]
        n0 = len(seq) - 1
        while n0 > 0 and seq[n0 - 1] == final:
            n0 -= 1
        return self.rows[n0].n

    def check_invariants(self, tol=1e-10):
        """Objective monotone, descent non-negative and above step_norm^2 / s."""
        for i in range(len(self.rows) - 1):
            if not self.rows[i + 1].objective <= self.rows[i].objective + tol:
                raise AssertionError(f"objective increased at step {self.rows[i].n}")
        for row in self.rows:
            if not row.descent >= -tol:
                raise AssertionError(f"negative descent value at step {row.n}")
            if row.step_size > 0:
                if not row.descent + tol >= row.step_norm**2 / row.step_size:
                    raise AssertionError(
                        f"descent below ||v-u||^2/s at step {row.n}"
                    )

    def to_csv(self, path):
        """Write the trace; floats use ``repr`` so a round trip is exact."""
        with open(path, "w", encoding="ascii") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in self.rows:
                fh.write(
                    ",".join(_fmt(getattr(row, _FIELD_BY_COLUMN[c])) for c in CSV_COLUMNS)
                    + "\n"
                )

    @classmethod
    def from_csv(cls, path):
        with open(path, "r", encoding="ascii") as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
        if not lines or lines[0].split(",") != list(CSV_COLUMNS):
            raise ValueError(f"{path}: unexpected trace header")
        rows = []
        for ln in lines[1:]:
            toks = ln.split(",")
            vals = {}
            for col, tok in zip(CSV_COLUMNS, toks):
                attr = _FIELD_BY_COLUMN[col]
                if tok == "":
                    vals[attr] = None
                elif col in ("n", "support_size"):
                    vals[attr] = int(tok)
                else:
                    vals[attr] = float(tok)
            rows.append(TraceRow(support=None, **vals))
        return cls(rows=rows)


def bregman_distance(problem, u_star, v):
    """``R(v) = <F'(u*), v - u*> + Phi(v) - Phi(u*)``.

    For the ball indicator this is ``-<w*, v - u*>`` on the feasible set
    and ``+inf`` outside it.
    """
    v = np.asarray(v, dtype=float)
    u_star = np.asarray(u_star, dtype=float)
    phi_v = problem.penalty.value(v)
    if math.isinf(phi_v):
        return math.inf
    grad_star = problem.gradient(u_star)
    phi_star = problem.penalty.value(u_star)
    return float(grad_star @ (v - u_star)) + phi_v - phi_star


def taylor_distance(problem, u_star, v):
    """Quadratic remainder ``T(v) = 0.5 ||K (v - u*)||^2``."""
    v = np.asarray(v, dtype=float)
    u_star = np.asarray(u_star, dtype=float)
    kd = problem.operator.apply(v - u_star)
    return 0.5 * float(kd @ kd)


def _block_zero(x):
    return not np.any(x)


def optimality_residual(problem, u):
    """How far ``u`` is from satisfying the first-order conditions.

    Returns a scalar that is zero exactly at minimizers: subgradient
    violations for the l1-type penalties, the support-function identity
    plus feasibility violation for the ball constraint.
    """
    u = np.asarray(u, dtype=float)
    penalty = problem.penalty
    w = problem.dual_vector(u)
    if isinstance(penalty, WeightedL1):
        alpha = penalty.weights.alpha
        res = 0.0
        for k in range(u.size):
            if u[k] == 0.0:
                res = max(res, abs(w[k]) - alpha[k])
            else:
                res = max(res, abs(w[k] - alpha[k] * math.copysign(1.0, u[k])))
        return max(res, 0.0)
    if isinstance(penalty, JointSparsity):
        alpha = penalty.weights.alpha
        norm = penalty.norm
        ublocks = penalty.blocks(u)
        wblocks = penalty.blocks(w)
        res = 0.0
        for k in range(penalty.num_blocks):
            dual = norm.dual_value(wblocks[k])
            if _block_zero(ublocks[k]):
                res = max(res, dual - alpha[k])
            else:
                res = max(res, abs(dual - alpha[k]))
                pairing = float(wblocks[k] @ ublocks[k])
                target = alpha[k] * norm.value(ublocks[k])
                scale = max(1.0, float(np.linalg.norm(ublocks[k])))
                res = max(res, abs(pairing - target) / scale)
        return max(res, 0.0)
    if isinstance(penalty, L1BallIndicator):
        alpha = penalty.weights.alpha
        r = penalty.radius
        mass = float(alpha @ np.abs(u))
        res = max(mass - r, 0.0)
        w_bar = float(np.max(np.abs(w) / alpha))
        support_gap = abs(r * w_bar - float(w @ u))
        return res + support_gap / max(1.0, r * w_bar)
    raise TypeError(f"unsupported penalty {penalty!r}")


@dataclass
class SupportAnalysis:
    """Active set and strictness data of the dual vector at a minimizer."""

    w_star: np.ndarray
    active_set: tuple
    rho: float
    strict_pattern: bool
    subspace_dim: int
    minimizer_support: tuple
    active_tol: float
    optimality_residual: float
    penalty_kind: str


def support_analysis(problem, u_star, tol=1e-8):
    """Active set ``I``, margin ``rho`` and strictness at a verified minimizer.

    ``u_star`` must pass the optimality-residual check at ``tol``; the
    analysis is meaningless away from a solution.  Works for the weighted
    l1 and joint-sparsity penalties (per-index dual magnitudes).
    """
    u_star = np.asarray(u_star, dtype=float)
    penalty = problem.penalty
    if not isinstance(penalty, (WeightedL1, JointSparsity)):
        raise TypeError("support_analysis applies to l1-type penalties; "
                        "use ball_support_analysis for the ball constraint")
    res = optimality_residual(problem, u_star)
    if res > tol:
        raise OptimalityError(
            f"optimality residual {res:.3e} exceeds tol {tol:.1e}; "
            "support analysis needs a (near-)minimizer"
        )
    w = problem.dual_vector(u_star)
    alpha = penalty.weights.alpha
    if isinstance(penalty, WeightedL1):
        mags = np.abs(w)
        zero = u_star == 0.0
    else:
        wblocks = penalty.blocks(w)
        ublocks = penalty.blocks(u_star)
        mags = np.array([penalty.norm.dual_value(b) for b in wblocks])
        zero = np.array([_block_zero(b) for b in ublocks])
    active = mags >= alpha * (1.0 - ACTIVE_SET_RTOL)
    active_set = tuple(int(k) for k in np.nonzero(active)[0])
    inactive = ~active
    rho = float(np.max(mags[inactive] / alpha[inactive])) if np.any(inactive) else 0.0
    strict = bool(np.all(mags[zero] < alpha[zero] - tol)) if np.any(zero) else True
    stray = inactive & ~zero
    if np.any(stray):
        raise OptimalityError(
            f"nonzero coefficients on strictly inactive indices {np.nonzero(stray)[0]}"
        )
    return SupportAnalysis(
        w_star=w,
        active_set=active_set,
        rho=rho,
        strict_pattern=strict,
        subspace_dim=len(active_set),
        minimizer_support=tuple(int(k) for k in np.nonzero(~zero)[0]),
        active_tol=ACTIVE_SET_RTOL,
        optimality_residual=res,
        penalty_kind=penalty.kind,
    )


@dataclass
class BallSupportAnalysis:
    """Active set of the ball-constrained optimality conditions."""

    w_star: np.ndarray
    w_bar: float
    active_set: tuple
    rho: float
    active_mass: float
    sign_agreement: bool
    radius: float
    optimality_residual: float


def ball_support_analysis(problem, u_star, tol=1e-8):
    """Active set ``I = {k : |w*_k|/alpha_k = max}`` for the ball constraint.

    Also reports the weighted mass of the active coefficients (which
    equals the radius at a boundary solution) and whether the signs of
    ``u*`` agree with ``w*`` on the support.
    """
    u_star = np.asarray(u_star, dtype=float)
    penalty = problem.penalty
    if not isinstance(penalty, L1BallIndicator):
        raise TypeError("ball_support_analysis requires the l1-ball indicator penalty")
    res = optimality_residual(problem, u_star)
    if res > tol:
        raise OptimalityError(
            f"optimality residual {res:.3e} exceeds tol {tol:.1e}"
        )
    w = problem.dual_vector(u_star)
    alpha = penalty.weights.alpha
    g = np.abs(w) / alpha
    w_bar = float(np.max(g))
    if w_bar == 0.0:
        return BallSupportAnalysis(
            w_star=w, w_bar=0.0, active_set=(), rho=0.0,
            active_mass=0.0, sign_agreement=True,
            radius=penalty.radius, optimality_residual=res,
        )
    active = g >= w_bar * (1.0 - ACTIVE_SET_RTOL)
    active_set = tuple(int(k) for k in np.nonzero(active)[0])
    inactive = ~active
    rho = float(np.max(g[inactive]) / w_bar) if np.any(inactive) else 0.0
    mass = float(alpha[active] @ np.abs(u_star[active]))
    supp = u_star != 0.0
    sign_ok = bool(np.all(np.sign(u_star[supp]) == np.sign(w[supp]))) if np.any(supp) else True
    return BallSupportAnalysis(
        w_star=w,
        w_bar=w_bar,
        active_set=active_set,
        rho=rho,
        active_mass=mass,
        sign_agreement=sign_ok,
        radius=penalty.radius,
        optimality_residual=res,
    )


@dataclass
class RateCertificate:
    """Instance-computed geometric rate ``||u^n - u*|| <= C * lam^n``.

    ``C`` is ``None`` for the strict-pattern kind, whose contraction only
    holds after the (a-priori unknown) support-freezing index.
    """

    kind: str
    lam: float
    C: float | None
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise ValueError(f"certificate rate must lie in [0, 1), got {self.lam}")
        if self.C is not None and self.C < 0:
            raise ValueError(f"certificate constant must be >= 0, got {self.C}")


def _resolve_norm_sq(operator, op_norm_sq):
    if op_norm_sq is not None:
        return float(op_norm_sq)
    if operator.cols <= DENSE_EIG_MAX_DIM:
        return operator_norm_sq_dense(operator)
    return operator_norm_sq(operator)


def _rule_params(rule, op_norm_sq):
    """``(s_min, s_max, delta)`` of a step rule; s_max None for condition B."""
    if rule is None:
        s = 1.0 / op_norm_sq if op_norm_sq > 0 else 1.0
        return s, s, 0.5 if op_norm_sq > 0 else 1.0
    if hasattr(rule, "s"):
        delta = 1.0 - rule.s * op_norm_sq / 2.0
        return rule.s, rule.s, delta
    if hasattr(rule, "s_max"):
        delta = 1.0 - rule.s_max * op_norm_sq / 2.0
        return rule.s_min, rule.s_max, delta
    if hasattr(rule, "delta"):
        return rule.s_min, None, rule.delta
    raise TypeError(f"unknown step-size rule {rule!r}")


def _min_gram_eig(operator, coords):
    sub = operator.entries[:, list(coords)]
    smin = float(np.linalg.svd(sub, compute_uv=False)[-1])
    return smin * smin


def certificate_fbi(problem, u_star, fbi_report, M=None, rule=None,
                    op_norm_sq=None, tol=1e-8):
    """Rate certificate from the Bregman/Taylor lower bound.

    Assembles ``c1`` from the active-set margin ``rho`` and the energy
    level ``M`` (default: objective at zero), ``c_bar`` from the smallest
    singular value of the columns on the active set (taken from
    ``fbi_report`` when it recorded that subset), combines them into the
    norm-versus-gap constant, and converts the per-step descent into a
    geometric rate.

    Requires ``rho < 1 - tol`` and an injectivity check covering the
    active set.  Supports all three penalties; the ball constraint uses
    its own Bregman constant (no energy level enters).
    """
    u_star = np.asarray(u_star, dtype=float)
    penalty = problem.penalty
    L = _resolve_norm_sq(problem.operator, op_norm_sq)
    if M is None:
        M_val = problem.objective(np.zeros(problem.dim))
    else:
        M_val = float(M)

    if isinstance(penalty, L1BallIndicator):
        analysis = ball_support_analysis(problem, u_star, tol=tol)
        rho = analysis.rho
        if analysis.w_bar <= 0.0:
            raise CertificateError(
                "dual vector vanishes at the solution (data inside the image "
                "of the ball); no linear-rate certificate applies"
            )
        if rho >= 1.0 - tol:
            raise CertificateError(f"active-set margin too thin: rho={rho}")
        amin = penalty.alpha_min
        c1 = analysis.w_bar * (1.0 - rho) * amin**2 / penalty.radius
        coords = analysis.active_set
    else:
        analysis = support_analysis(problem, u_star, tol=tol)
        rho = analysis.rho
        if rho >= 1.0 - tol:
            raise CertificateError(f"active-set margin too thin: rho={rho}")
        amin = penalty.alpha_min
        c1 = (1.0 - rho) * amin**2 / (M_val + 1.0)
        if isinstance(penalty, JointSparsity):
            c0, C0 = penalty.norm_equivalence()
            c1 *= c0 / C0
            size = penalty.norm.block_size
            coords = tuple(
                k * size + j for k in analysis.active_set for j in range(size)
            )
        else:
            coords = analysis.active_set

    if not fbi_report.passes:
        raise CertificateError("operator failed the injectivity check")
    if coords:
        recorded = fbi_report.value_for(coords)
        if recorded is not None:
            c_bar = recorded**2
        elif len(coords) <= fbi_report.order:
            c_bar = _min_gram_eig(problem.operator, coords)
        else:
            raise CertificateError(
                f"injectivity checked only up to order {fbi_report.order}, "
                f"but the active set has {len(coords)} coordinates"
            )
        if c_bar <= 0.0:
            raise CertificateError("operator not injective on the active set")
        c = (2.0 * L + c_bar + 4.0 * c1) / (c_bar * c1)
    else:
        c_bar = math.inf
        c = 1.0 / c1

    s_min, _, delta = _rule_params(rule, L)
    if not delta > 0:
        raise CertificateError(f"step rule gives no descent guarantee (delta={delta})")
    lam = math.sqrt(1.0 - delta * s_min / (2.0 * s_min + c))
    r0 = max(M_val - problem.objective(u_star), 0.0)
    C = math.sqrt(c * r0)
    return RateCertificate(
        kind="fbi_bregman_taylor",
        lam=lam,
        C=C,
        constants={
            "delta": delta,
            "c": c,
            "c1": c1,
            "c2": 1.0 / c,
            "c_bar": c_bar,
            "rho": rho,
            "M": M_val,
            "r0": r0,
            "s_min": s_min,
            "op_norm_sq": L,
            "active_set_size": len(coords),
            "subspace": "U_dual",
        },
    )


def certificate_compact(spectral, weights, f_norm, op_norm_sq=None):
    """Closed-form a-priori certificate for compact (decaying) operators.

    Picks the smallest ``k0`` whose tail bound ``mu_{k0}`` drops below
    ``alpha_min^2 / (4 ||f||^2)`` and evaluates the explicit rate and
    a-priori constant.  Valid for runs started at zero with the constant
    step ``1 / ||K||^2``.  Zero data yields the degenerate rate 0.
    """
    L = float(op_norm_sq) if op_norm_sq is not None else spectral.operator_norm_sq
    amin = weights.lower_bound
    f_norm = float(f_norm)
    if f_norm == 0.0:
        return RateCertificate(
            kind="compact_explicit", lam=0.0, C=0.0,
            constants={"degenerate": 1.0, "f_norm": 0.0, "op_norm_sq": L},
        )
    bound = amin**2 / (4.0 * f_norm**2)
    k0 = None
    for k in range(1, spectral.k_max() + 1):
        if spectral.mu[k - 1] <= bound:
            k0 = k
            break
    if k0 is None:
        raise CertificateError(
            f"no k <= {spectral.k_max()} has tail bound mu_k <= {bound:.3e}; "
            "recompute the spectral report with a larger k_max"
        )
    sigma = spectral.sigma[k0 - 1]
    if sigma <= 0.0:
        raise CertificateError(
            f"head Gram matrix singular at k0={k0}; injectivity fails on the "
            "leading coordinates"
        )
    if math.isinf(sigma):
        term1 = 1.0 - 0.25
        term2 = 1.0 - amin**2 / (4.0 * amin**2 + 2.0 * L * f_norm**2)
        C = f_norm**2 / (math.sqrt(2.0) * amin)
    else:
        term1 = 1.0 - sigma / (4.0 * sigma + 8.0 * L)
        term2 = 1.0 - sigma * amin**2 / (
            4.0 * sigma * amin**2 + 2.0 * (sigma + 2.0 * L) * L * f_norm**2
        )
        C = math.sqrt(
            (4.0 * amin**2 * f_norm**2 + (sigma + 2.0 * L) * f_norm**4)
            / (2.0 * sigma * amin**2)
        )
    lam = math.sqrt(max(term1, term2))
    return RateCertificate(
        kind="compact_explicit",
        lam=lam,
        C=C,
        constants={
            "k0": k0,
            "sigma_k0": sigma,
            "mu_k0": spectral.mu[k0 - 1],
            "alpha_min": amin,
            "f_norm": f_norm,
            "op_norm_sq": L,
            "step_size": (1.0 / L) if L > 0 else math.inf,
            "delta": 0.5,
        },
    )


def certificate_strict_pattern(problem, analysis, rule, op_norm_sq=None,
                               rank_rtol=1e-10):
    """Asymptotic contraction factor once the support has frozen.

    ``analysis`` must report a strict sparsity pattern.  The factor is
    ``max(s_max ||K||^2 - 1, 1 - s_min c)`` where ``c`` is the smallest
    positive eigenvalue of the Gram matrix of the columns on the support
    of the minimizer (the contraction acts on the orthogonal complement
    of that restricted kernel).  Applies after finitely many steps, so no
    global constant ``C`` is reported.
    """
    if analysis.penalty_kind != "weighted_l1":
        raise CertificateError("strict-pattern certificate applies to the weighted l1 penalty")
    if not analysis.strict_pattern:
        raise CertificateError("minimizer does not have a strict sparsity pattern")
    L = _resolve_norm_sq(problem.operator, op_norm_sq)
    s_min, s_max, _ = _rule_params(rule, L)
    if s_max is None:
        raise CertificateError(
            "strict-pattern certificate needs an a-priori upper step bound "
            "(constant or bounded rule)"
        )
    support = analysis.minimizer_support
    if not support:
        return RateCertificate(
            kind="strict_pattern_contraction", lam=0.0, C=None,
            constants={"c": math.inf, "op_norm_sq": L, "s_min": s_min,
                       "s_max": s_max, "subspace": "U_support", "support_size": 0},
        )
    eigs = np.linalg.eigvalsh(_gram(problem.operator, support))
    cutoff = max(float(eigs[-1]), 0.0) * rank_rtol
    positive = eigs[eigs > cutoff]
    if positive.size == 0:
        raise CertificateError("restricted operator vanishes on the support (c = 0)")
    c = float(positive[0])
    lam = max(s_max * L - 1.0, 1.0 - s_min * c, 0.0)
    if lam >= 1.0:
        raise CertificateError(f"no contraction: factor {lam} >= 1")
    return RateCertificate(
        kind="strict_pattern_contraction",
        lam=lam,
        C=None,
        constants={
            "c": c,
            "op_norm_sq": L,
            "s_min": s_min,
            "s_max": s_max,
            "subspace": "U_support",
            "support_size": len(support),
        },
    )


def _gram(operator, coords):
    sub = operator.entries[:, list(coords)]
    return sub.T @ sub


@dataclass
class RateFit:
    """Least-squares geometric fit of a trace column."""

    lam_hat: float
    c_hat: float
    r_squared: float
    n_points: int
    fit_field: str
    note: str = ""


def fit_rate(trace, burn_in=None, fit_field="dist_to_ref", floor=0.0):
    """Fit ``value_n ~ C * lam^n`` on ``log(value)`` over steps ``n > burn_in``.

    ``burn_in`` defaults to the larger of 10 and the support-freezing
    step, since the contraction only sets in after the pre-asymptotic
    phase.  Exact zeros in the window mean the sequence dropped below
    floating-point resolution; that is reported as rate 0 with a note.

    Raises ``ValueError`` with fewer than 5 usable points.
    """
    if burn_in is None:
        burn_in = max(10, trace.support_stabilization_step())
    pts = [
        (n, v)
        for n, v in trace.series(_FIELD_BY_COLUMN.get(fit_field, fit_field))
        if n > burn_in and v is not None
    ]
    if not pts:
        raise ValueError(f"no {fit_field} entries beyond burn_in={burn_in}")
    if any(v == 0.0 for _, v in pts):
        return RateFit(
            lam_hat=0.0, c_hat=0.0, r_squared=1.0, n_points=len(pts),
            fit_field=fit_field,
            note="exact zero reached; decay is below floating-point resolution",
        )
    pts = [(n, v) for n, v in pts if v > floor]
    if len(pts) < 5:
        raise ValueError(f"fewer than 5 usable points ({len(pts)}) beyond burn_in")
    x = np.array([n for n, _ in pts], dtype=float)
    y = np.log(np.array([v for _, v in pts]))
    slope, intercept = np.polyfit(x, y, deg=1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(
        lam_hat=float(math.exp(slope)),
        c_hat=float(math.exp(intercept)),
        r_squared=r2,
        n_points=len(pts),
        fit_field=fit_field,
    )


@dataclass
class SublinearReport:
    """O(1/n) descent verification along a trace."""

    q: float
    r0: float
    radius_bound: float
    per_step_ok: bool
    bound_ok: bool
    first_violation: int | None
    max_n_times_gap: float
    gap_limit: float
    checked_steps: int
    trivially_converged: bool = False


def sublinear_check(trace, delta, s_min, alpha_min, ball_radius=None, slack=1e-10):
    """Verify the per-step inequality ``q r_n^2 <= r_n - r_{n+1}`` and the
    resulting bound ``r_n <= 1 / (n q + 1/r_0)``.

    ``q`` is assembled from the initial gap, the descent coefficient, the
    step-size floor and an a-priori iterate-radius bound: twice the
    initial objective over ``alpha_min`` for the l1-type penalties, twice
    the ball radius over ``alpha_min`` for the constrained problem.
    """
    gaps = [row.gap for row in trace.rows]
    if not gaps or any(g is None for g in gaps):
        raise ValueError("trace is missing gap entries; solve with a reference minimizer")
    r0 = gaps[0]
    if ball_radius is not None:
        radius_bound = 2.0 * ball_radius / alpha_min
    else:
        radius_bound = 2.0 * trace.rows[0].objective / alpha_min
    if r0 <= 0.0:
        return SublinearReport(
            q=math.inf, r0=r0, radius_bound=radius_bound, per_step_ok=True,
            bound_ok=True, first_violation=None, max_n_times_gap=0.0,
            gap_limit=0.0, checked_steps=len(gaps), trivially_converged=True,
        )
    q = (delta / (math.sqrt(r0) + math.sqrt(delta / s_min) * radius_bound)) ** 2
    per_step_ok = True
    bound_ok = True
    first_violation = None
    max_n_gap = 0.0
    for i in range(len(gaps) - 1):
        if not q * gaps[i] ** 2 <= gaps[i] - gaps[i + 1] + slack:
            per_step_ok = False
            if first_violation is None:
                first_violation = trace.rows[i].n
    for i, g in enumerate(gaps):
        n = trace.rows[i].n
        if n >= 1:
            max_n_gap = max(max_n_gap, n * g)
            if not g <= 1.0 / (n * q + 1.0 / r0) + slack:
                bound_ok = False
                if first_violation is None:
                    first_violation = n
    return SublinearReport(
        q=q,
        r0=r0,
        radius_bound=radius_bound,
        per_step_ok=per_step_ok,
        bound_ok=bound_ok,
        first_violation=first_violation,
        max_n_times_gap=max_n_gap,
        gap_limit=1.0 / q,
        checked_steps=len(gaps),
    )
