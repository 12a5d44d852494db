"""Experiment configuration and orchestration.

An experiment is described by a JSON file (``config_version: 1``): where
the operator, data and penalty come from (CSV files or seeded
generators), which step rule and stopping criteria to use, whether to
compute the enumeration oracle, and which rate certificates to evaluate.
``run_experiment`` executes the solver, checks the fitted rate against
every certificate, and writes the trace CSV, a structured report, a
summary, and (optionally) figures.

Exit codes: 0 success, 1 invalid configuration, 2 runtime failure,
3 fitted rate exceeded a certificate (a test-integrity signal).
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import (
    ball_support_analysis,
    certificate_compact,
    certificate_fbi,
    certificate_strict_pattern,
    fit_rate,
    support_analysis,
)
from .errors import ConfigError, StepSizeError
from .operators import (
    DENSE_EIG_MAX_DIM,
    DenseOperator,
    fbi_check,
    load_matrix,
    load_vector,
    operator_norm_sq,
    operator_norm_sq_dense,
    save_vector,
    spectral_report,
)
from .oracle import enumerate_minimizer
from .prox import BlockNorm, JointSparsity, L1BallIndicator, WeightedL1, Weights
from .solvers import (
    BoundedStep,
    ConditionB,
    ConstantStep,
    Problem,
    StoppingRule,
    solve,
    validate_rule,
)

CONFIG_VERSION = 1

#: fitted-vs-certificate comparison slack
CERTIFICATE_TOL = 1e-6

_EXIT_OK = 0
_EXIT_CONFIG = 1
_EXIT_RUNTIME = 2
_EXIT_CERT_VIOLATED = 3


def _get(section, key, path, required=False, default=None):
    if key not in section:
        if required:
            raise ConfigError(f"{path}.{key}", "required field missing")
        return default
    return section[key]


def _require_type(value, types, path):
    if not isinstance(value, types):
        names = types.__name__ if isinstance(types, type) else "/".join(t.__name__ for t in types)
        raise ConfigError(path, f"expected {names}, got {type(value).__name__}")
    return value


def _positive(value, path):
    value = _require_type(value, (int, float), path)
    if not value > 0:
        raise ConfigError(path, f"must be positive, got {value}")
    return float(value)


def _seeded_rng(section, path, seed_override=None):
    seed = section.get("seed")
    if seed_override is not None:
        seed = seed_override
    if seed is None:
        raise ConfigError(f"{path}.seed", "random sources need an explicit seed")
    return np.random.default_rng(int(seed)), int(seed)


def build_operator(spec, path="problem.operator", seed_override=None):
    kind = _get(spec, "kind", path, required=True)
    if kind == "identity":
        dim = int(_positive(_get(spec, "dim", path, required=True), f"{path}.dim"))
        return DenseOperator.identity(dim)
    if kind == "diagonal-decay":
        dim = int(_positive(_get(spec, "dim", path, required=True), f"{path}.dim"))
        rate = _positive(_get(spec, "rate", path, required=True), f"{path}.rate")
        if rate >= 1.0:
            raise ConfigError(f"{path}.rate", f"decay rate must be < 1, got {rate}")
        return DenseOperator.diagonal(rate ** np.arange(dim))
    if kind == "random-gaussian":
        rows = int(_positive(_get(spec, "rows", path, required=True), f"{path}.rows"))
        cols = int(_positive(_get(spec, "cols", path, required=True), f"{path}.cols"))
        scale = float(spec.get("scale", 1.0 / math.sqrt(rows)))
        rng, _ = _seeded_rng(spec, path, seed_override)
        return DenseOperator(scale * rng.standard_normal((rows, cols)))
    if kind == "duplicate-column":
        base_spec = _get(spec, "base", path, required=True)
        base = build_operator(base_spec, f"{path}.base", seed_override)
        source = int(spec.get("source", base.cols - 1))
        if not 0 <= source < base.cols:
            raise ConfigError(f"{path}.source", f"column {source} out of range")
        entries = np.column_stack([base.entries, base.entries[:, source]])
        return DenseOperator(entries)
    if kind == "csv":
        p = _get(spec, "path", path, required=True)
        try:
            return DenseOperator(load_matrix(p))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{path}.path", str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown operator kind {kind!r}")


def build_data(spec, operator, path="problem.data", seed_override=None):
    kind = _get(spec, "kind", path, required=True)
    if kind == "values":
        values = np.asarray(_get(spec, "values", path, required=True), dtype=float)
        if values.shape != (operator.rows,):
            raise ConfigError(
                f"{path}.values",
                f"expected {operator.rows} entries, got {values.size}",
            )
        return values
    if kind == "csv":
        p = _get(spec, "path", path, required=True)
        try:
            vec = load_vector(p)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{path}.path", str(exc)) from exc
        if vec.size != operator.rows:
            raise ConfigError(f"{path}.path", f"expected {operator.rows} entries, got {vec.size}")
        return vec
    if kind == "random-gaussian":
        scale = float(spec.get("scale", 1.0))
        rng, _ = _seeded_rng(spec, path, seed_override)
        return scale * rng.standard_normal(operator.rows)
    if kind == "from-signal":
        support = _get(spec, "support", path, required=True)
        values = _get(spec, "values", path, required=True)
        if len(support) != len(values):
            raise ConfigError(f"{path}.support", "support and values lengths differ")
        u0 = np.zeros(operator.cols)
        for k, v in zip(support, values):
            if not 0 <= int(k) < operator.cols:
                raise ConfigError(f"{path}.support", f"index {k} out of range")
            u0[int(k)] = float(v)
        f = operator.apply(u0)
        noise = float(spec.get("noise", 0.0))
        if noise > 0:
            rng, _ = _seeded_rng(spec, path, seed_override)
            f = f + noise * rng.standard_normal(operator.rows)
        return f
    raise ConfigError(f"{path}.kind", f"unknown data kind {kind!r}")


def build_weights(spec, count, path):
    kind = _get(spec, "kind", path, required=True)
    if kind == "constant":
        value = _positive(_get(spec, "value", path, required=True), f"{path}.value")
        return Weights.constant(value, count)
    if kind == "values":
        values = np.asarray(_get(spec, "values", path, required=True), dtype=float)
        if values.size != count:
            raise ConfigError(f"{path}.values", f"expected {count} weights, got {values.size}")
        if np.any(values <= 0):
            raise ConfigError(f"{path}.values", "weights must be positive")
        return Weights.from_alpha(values)
    if kind == "csv":
        p = _get(spec, "path", path, required=True)
        try:
            values = load_vector(p)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"{path}.path", str(exc)) from exc
        if values.size != count:
            raise ConfigError(f"{path}.path", f"expected {count} weights, got {values.size}")
        return Weights.from_alpha(values)
    raise ConfigError(f"{path}.kind", f"unknown weights kind {kind!r}")


def build_penalty(spec, cols, path="problem.penalty"):
    kind = _get(spec, "kind", path, required=True)
    if kind == "weighted-l1":
        weights = build_weights(_get(spec, "alpha", path, required=True), cols, f"{path}.alpha")
        return WeightedL1(weights)
    if kind == "joint":
        block_size = int(_positive(_get(spec, "block_size", path, required=True), f"{path}.block_size"))
        if cols % block_size != 0:
            raise ConfigError(f"{path}.block_size", f"{cols} columns not divisible by {block_size}")
        q_raw = _get(spec, "q", path, required=True)
        q = math.inf if q_raw in ("inf", "Infinity") else q_raw
        try:
            norm = BlockNorm(q, block_size)
        except ValueError as exc:
            raise ConfigError(f"{path}.q", str(exc)) from exc
        weights = build_weights(
            _get(spec, "alpha", path, required=True), cols // block_size, f"{path}.alpha"
        )
        return JointSparsity(weights, norm)
    if kind == "l1-ball":
        radius = float(spec.get("radius", 1.0))
        if radius <= 0:
            raise ConfigError(f"{path}.radius", f"must be positive, got {radius}")
        weights = build_weights(_get(spec, "alpha", path, required=True), cols, f"{path}.alpha")
        return L1BallIndicator(weights, radius=radius)
    raise ConfigError(f"{path}.kind", f"unknown penalty kind {kind!r}")


def _resolve_step(spec, key, op_norm_sq, path):
    """Absolute step from either ``key`` or ``key_rel`` (multiples of 1/||K||^2)."""
    has_abs = key in spec
    has_rel = f"{key}_rel" in spec
    if has_abs == has_rel:
        raise ConfigError(f"{path}.{key}", f"give exactly one of {key} or {key}_rel")
    if has_abs:
        return _positive(spec[key], f"{path}.{key}")
    rel = _positive(spec[f"{key}_rel"], f"{path}.{key}_rel")
    if op_norm_sq == 0.0:
        return rel
    return rel / op_norm_sq


def build_rule(spec, op_norm_sq, path="step_rule"):
    kind = _get(spec, "kind", path, required=True)
    if kind == "constant":
        rule = ConstantStep(_resolve_step(spec, "s", op_norm_sq, path))
    elif kind == "bounded":
        rule = BoundedStep(
            _resolve_step(spec, "s_min", op_norm_sq, path),
            _resolve_step(spec, "s_max", op_norm_sq, path),
        )
    elif kind == "condition-b":
        delta = _positive(_get(spec, "delta", path, required=True), f"{path}.delta")
        rule = ConditionB(
            s_min=_resolve_step(spec, "s_min", op_norm_sq, path),
            delta=delta,
            growth=float(spec.get("growth", 1.5)),
        )
    else:
        raise ConfigError(f"{path}.kind", f"unknown step rule {kind!r}")
    try:
        validate_rule(rule, op_norm_sq)
    except StepSizeError as exc:
        raise ConfigError(path, str(exc)) from exc
    return rule


def build_stopping(spec, path="stopping"):
    try:
        return StoppingRule(
            max_iters=int(spec.get("max_iters", 100_000)),
            step_tol=float(spec.get("step_tol", 1e-10)),
            gap_tol=None if spec.get("gap_tol") is None else float(spec["gap_tol"]),
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


_KNOWN_CERTIFICATES = ("fbi", "compact", "strict-pattern")


@dataclass
class ResolvedExperiment:
    problem: Problem
    rule: object
    stopping: StoppingRule
    op_norm_sq: float
    oracle_enabled: bool
    certificates: list
    fbi_threshold: float
    fbi_order: int | None
    spectral_k_max: int | None
    outputs: dict
    raw: dict = field(default_factory=dict)


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError("config", str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON: {exc}") from exc


def resolve_experiment(cfg, seed_override=None):
    """Validate a config dict and build every component."""
    version = _get(cfg, "config_version", "", required=True)
    if version != CONFIG_VERSION:
        raise ConfigError("config_version", f"expected {CONFIG_VERSION}, got {version!r}")
    prob_cfg = _require_type(_get(cfg, "problem", "", required=True), dict, "problem")
    operator = build_operator(
        _require_type(_get(prob_cfg, "operator", "problem", required=True), dict, "problem.operator"),
        seed_override=seed_override,
    )
    penalty = build_penalty(
        _require_type(_get(prob_cfg, "penalty", "problem", required=True), dict, "problem.penalty"),
        operator.cols,
    )
    data = build_data(
        _require_type(_get(prob_cfg, "data", "problem", required=True), dict, "problem.data"),
        operator,
        seed_override=None if seed_override is None else seed_override + 1,
    )
    problem = Problem(operator=operator, data=data, penalty=penalty)

    if operator.cols <= DENSE_EIG_MAX_DIM:
        opn = operator_norm_sq_dense(operator)
    else:
        opn = operator_norm_sq(operator)

    rule = build_rule(
        _require_type(_get(cfg, "step_rule", "", required=True), dict, "step_rule"), opn
    )
    stopping = build_stopping(cfg.get("stopping", {}))

    certificates = list(cfg.get("certificates", []))
    for kind in certificates:
        if kind not in _KNOWN_CERTIFICATES:
            raise ConfigError("certificates", f"unknown certificate kind {kind!r}")
    oracle_enabled = bool(cfg.get("oracle", False))
    if oracle_enabled and not isinstance(penalty, WeightedL1):
        raise ConfigError("oracle", "the enumeration oracle needs the weighted-l1 penalty")

    fbi_cfg = cfg.get("fbi", {})
    spectral_cfg = cfg.get("spectral", {})
    out_cfg = cfg.get("output", {})
    outputs = {
        "trace": out_cfg.get("trace", "trace.csv"),
        "report": out_cfg.get("report", "report.json"),
        "summary": out_cfg.get("summary", "summary.json"),
        "oracle": out_cfg.get("oracle", "oracle.csv"),
        "plots": bool(out_cfg.get("plots", True)),
    }
    return ResolvedExperiment(
        problem=problem,
        rule=rule,
        stopping=stopping,
        op_norm_sq=opn,
        oracle_enabled=oracle_enabled,
        certificates=certificates,
        fbi_threshold=float(fbi_cfg.get("threshold", 1e-8)),
        fbi_order=None if fbi_cfg.get("order") is None else int(fbi_cfg["order"]),
        spectral_k_max=None if spectral_cfg.get("k_max") is None else int(spectral_cfg["k_max"]),
        outputs=outputs,
        raw=cfg,
    )


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _rule_description(rule):
    if isinstance(rule, ConstantStep):
        return {"kind": "constant", "s": rule.s}
    if isinstance(rule, BoundedStep):
        return {"kind": "bounded", "s_min": rule.s_min, "s_max": rule.s_max}
    return {
        "kind": "condition-b",
        "s_min": rule.s_min,
        "delta": rule.delta,
        "growth": rule.growth,
    }


def _fbi_summary(report):
    values = report.min_singular_by_support
    worst = min(values, key=values.get) if values else None
    out = {
        "order": report.order,
        "threshold": report.threshold,
        "passes": report.passes,
        "checked_subsets": len(values),
        "min_singular_value": values[worst] if worst else None,
        "worst_support": list(worst) if worst else None,
    }
    if len(values) <= 200:
        out["min_singular_by_support"] = {
            ",".join(map(str, k)): v for k, v in sorted(values.items())
        }
    return out


def _certificate_entry(cert):
    return {
        "kind": cert.kind,
        "lambda": cert.lam,
        "C": cert.C,
        "constants": cert.constants,
    }


def certificates_respected(lam_hat, lambdas, tol=CERTIFICATE_TOL):
    """True unless a fitted rate exceeds some certificate rate beyond tol."""
    if lam_hat is None:
        return True
    return all(lam_hat <= lam + tol for lam in lambdas)


def _default_fbi_order(resolved, reference_support):
    if resolved.fbi_order is not None:
        return resolved.fbi_order
    return max(1, len(reference_support))


def _active_coordinates(problem, analysis):
    if isinstance(problem.penalty, JointSparsity):
        size = problem.penalty.norm.block_size
        return tuple(k * size + j for k in analysis.active_set for j in range(size))
    return tuple(analysis.active_set)


def _compute_certificates(resolved, u_ref, report):
    """Evaluate requested certificates at ``u_ref``; returns the list."""
    problem = resolved.problem
    certs = []
    analysis = None
    if isinstance(problem.penalty, L1BallIndicator):
        analysis = ball_support_analysis(problem, u_ref, tol=1e-6)
        report["ball_support_analysis"] = {
            "active_set": list(analysis.active_set),
            "rho": analysis.rho,
            "w_bar": analysis.w_bar,
            "active_mass": analysis.active_mass,
            "sign_agreement": analysis.sign_agreement,
            "optimality_residual": analysis.optimality_residual,
        }
        coords = analysis.active_set
    else:
        analysis = support_analysis(problem, u_ref, tol=1e-6)
        report["support_analysis"] = {
            "active_set": list(analysis.active_set),
            "rho": analysis.rho,
            "strict_pattern": analysis.strict_pattern,
            "minimizer_support": list(analysis.minimizer_support),
            "optimality_residual": analysis.optimality_residual,
        }
        coords = _active_coordinates(problem, analysis)

    for kind in resolved.certificates:
        if kind == "fbi":
            order = _default_fbi_order(resolved, coords)
            fbi = fbi_check(
                problem.operator, order=order, threshold=resolved.fbi_threshold
            )
            report["fbi"] = _fbi_summary(fbi)
            certs.append(
                certificate_fbi(
                    problem, u_ref, fbi, rule=resolved.rule,
                    op_norm_sq=resolved.op_norm_sq, tol=1e-6,
                )
            )
        elif kind == "compact":
            if not isinstance(problem.penalty, WeightedL1):
                raise ConfigError("certificates", "compact certificate needs the weighted-l1 penalty")
            k_max = resolved.spectral_k_max or problem.operator.cols
            rep = spectral_report(problem.operator, k_max=k_max)
            report["spectral"] = {
                "k_max": k_max,
                "operator_norm_sq": rep.operator_norm_sq,
                "sigma": rep.sigma,
                "mu": rep.mu,
            }
            certs.append(
                certificate_compact(
                    rep,
                    problem.penalty.weights,
                    float(np.linalg.norm(problem.data)),
                    op_norm_sq=resolved.op_norm_sq,
                )
            )
        elif kind == "strict-pattern":
            certs.append(
                certificate_strict_pattern(
                    problem, analysis, resolved.rule, op_norm_sq=resolved.op_norm_sq
                )
            )
    return certs


@dataclass
class ExperimentResult:
    exit_code: int
    summary: dict
    out_dir: Path


def run_experiment(config, out_dir, seed_override=None):
    """Run a full experiment from a config dict; writes artifacts to ``out_dir``."""
    resolved = resolve_experiment(config, seed_override=seed_override)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    problem = resolved.problem

    report = {
        "config": resolved.raw,
        "op_norm_sq": resolved.op_norm_sq,
        "rule": _rule_description(resolved.rule),
        "dimensions": {"rows": problem.operator.rows, "cols": problem.operator.cols},
    }

    reference = None
    oracle_rec = None
    if resolved.oracle_enabled:
        oracle_rec = enumerate_minimizer(problem)
        reference = oracle_rec.minimizer
        report["oracle"] = {
            "objective": oracle_rec.objective,
            "support": list(oracle_rec.support),
            "patterns_checked": oracle_rec.patterns_checked,
            "singular_skipped": oracle_rec.singular_skipped,
            "subgradient_rejected": oracle_rec.subgradient_rejected,
        }
        save_vector(out_dir / resolved.outputs["oracle"], reference)

    result = solve(
        problem,
        rule=resolved.rule,
        stop=resolved.stopping,
        reference=reference,
        op_norm_sq=resolved.op_norm_sq,
    )
    trace_path = out_dir / resolved.outputs["trace"]
    result.trace.to_csv(trace_path)

    certs = _compute_certificates(resolved, reference if reference is not None else result.iterate, report)
    report["certificates"] = [_certificate_entry(c) for c in certs]

    fit = None
    fit_basis = "dist_to_ref" if reference is not None else "step_norm"
    fit_note = ""
    try:
        fit = fit_rate(result.trace, fit_field=fit_basis)
    except ValueError as exc:
        fit_note = str(exc)
    report["fit"] = (
        None
        if fit is None
        else {
            "lambda_hat": fit.lam_hat,
            "c_hat": fit.c_hat,
            "r_squared": fit.r_squared,
            "n_points": fit.n_points,
            "basis": fit.fit_field,
            "note": fit.note,
        }
    )

    lam_hat = None if fit is None else fit.lam_hat
    respected = certificates_respected(lam_hat, [c.lam for c in certs])
    summary = {
        "config_version": CONFIG_VERSION,
        "iterations": result.steps,
        "stop_reason": result.stop_reason,
        "final_objective": problem.objective(result.iterate),
        "op_norm_sq": resolved.op_norm_sq,
        "delta": result.delta,
        "rejected_trials": result.rejected_trials,
        "w_star_norm": result.w_star_norm,
        "lambda_hat": lam_hat,
        "fit_basis": fit_basis,
        "fit_r_squared": None if fit is None else fit.r_squared,
        "fit_note": fit_note or (fit.note if fit else ""),
        "certificate_lambdas": {c.kind: c.lam for c in certs},
        "certificate_respected": respected,
        "oracle_distance": (
            None
            if reference is None
            else float(np.linalg.norm(result.iterate - reference))
        ),
    }
    _write_json(out_dir / resolved.outputs["summary"], summary)
    _write_json(out_dir / resolved.outputs["report"], report)

    if resolved.outputs["plots"]:
        from . import plots

        plots.render_convergence(result.trace, certs, out_dir / "convergence.png")
        plots.render_iteration(result.trace, out_dir / "iteration.png")

    exit_code = _EXIT_OK if respected else _EXIT_CERT_VIOLATED
    return ExperimentResult(exit_code=exit_code, summary=summary, out_dir=out_dir)


def run_certify(config, out_dir, seed_override=None):
    """Certificates only, no iteration; needs the oracle for non-compact kinds."""
    resolved = resolve_experiment(config, seed_override=seed_override)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    problem = resolved.problem
    if not resolved.certificates:
        raise ConfigError("certificates", "certify needs at least one certificate kind")
    needs_reference = any(k != "compact" for k in resolved.certificates)
    reference = None
    report = {
        "config": resolved.raw,
        "op_norm_sq": resolved.op_norm_sq,
        "rule": _rule_description(resolved.rule),
    }
    if needs_reference:
        if not resolved.oracle_enabled:
            raise ConfigError(
                "oracle", "certify without iteration needs `oracle: true` for this certificate list"
            )
        rec = enumerate_minimizer(problem)
        reference = rec.minimizer
        report["oracle"] = {"objective": rec.objective, "support": list(rec.support)}
        save_vector(out_dir / resolved.outputs["oracle"], reference)
        certs = _compute_certificates(resolved, reference, report)
    else:
        certs = _compute_certificates_compact_only(resolved, report)
    report["certificates"] = [_certificate_entry(c) for c in certs]
    summary = {
        "config_version": CONFIG_VERSION,
        "certificate_lambdas": {c.kind: c.lam for c in certs},
        "certificate_respected": True,
    }
    _write_json(out_dir / resolved.outputs["summary"], summary)
    _write_json(out_dir / resolved.outputs["report"], report)
    return ExperimentResult(exit_code=_EXIT_OK, summary=summary, out_dir=out_dir)


def _compute_certificates_compact_only(resolved, report):
    problem = resolved.problem
    if not isinstance(problem.penalty, WeightedL1):
        raise ConfigError("certificates", "compact certificate needs the weighted-l1 penalty")
    k_max = resolved.spectral_k_max or problem.operator.cols
    rep = spectral_report(problem.operator, k_max=k_max)
    report["spectral"] = {
        "k_max": k_max,
        "operator_norm_sq": rep.operator_norm_sq,
        "sigma": rep.sigma,
        "mu": rep.mu,
    }
    return [
        certificate_compact(
            rep,
            problem.penalty.weights,
            float(np.linalg.norm(problem.data)),
            op_norm_sq=resolved.op_norm_sq,
        )
    ]


def run_oracle(config, out_dir, seed_override=None):
    """Enumeration only: writes the minimizer vector and its record."""
    resolved = resolve_experiment(config, seed_override=seed_override)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rec = enumerate_minimizer(resolved.problem)
    save_vector(out_dir / resolved.outputs["oracle"], rec.minimizer)
    payload = {
        "objective": rec.objective,
        "support": list(rec.support),
        "patterns_checked": rec.patterns_checked,
        "singular_skipped": rec.singular_skipped,
        "subgradient_rejected": rec.subgradient_rejected,
    }
    _write_json(out_dir / "oracle.json", payload)
    return ExperimentResult(exit_code=_EXIT_OK, summary=payload, out_dir=out_dir)


def run_spectral(config, out_dir, seed_override=None):
    """Spectral profile only."""
    resolved = resolve_experiment(config, seed_override=seed_override)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    k_max = resolved.spectral_k_max or resolved.problem.operator.cols
    rep = spectral_report(resolved.problem.operator, k_max=k_max)
    payload = {
        "k_max": k_max,
        "operator_norm_sq": rep.operator_norm_sq,
        "sigma": rep.sigma,
        "mu": rep.mu,
        "tolerance": rep.tolerance,
    }
    _write_json(out_dir / "spectral.json", payload)
    return ExperimentResult(exit_code=_EXIT_OK, summary=payload, out_dir=out_dir)
