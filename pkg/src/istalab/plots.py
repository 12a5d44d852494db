"""Figure rendering for experiment reports.

Renders alongside the delimited trace output: a convergence panel
(objective gap, distance to the reference, step norms, plus certificate
slopes) and an iteration panel (support size and step size per step).
Uses the Agg backend; output PNGs are deterministic for fixed inputs.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _positive_series(trace, name):
    n = trace.column("n")
    y = trace.column(name)
    mask = np.isfinite(y) & (y > 0)
    return n[mask], y[mask]


def render_convergence(trace, certificates, path):
    """Semilog decay plot of the trace with certificate slope overlays."""
    if not len(trace):
        return
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    labels = [("r_n", "objective gap"), ("dist_to_ref", "distance to reference"),
              ("step_norm", "step norm")]
    anchor = None
    for column, label in labels:
        n, y = _positive_series(trace, column)
        if n.size:
            ax.semilogy(n, y, label=label, linewidth=1.2)
            if anchor is None:
                anchor = (n[0], y[0])
    if anchor is not None:
        n_all = trace.column("n")
        span = np.linspace(anchor[0], n_all[-1], 64)
        for cert in certificates:
            if 0.0 < cert.lam < 1.0:
                envelope = anchor[1] * cert.lam ** (span - anchor[0])
                ax.semilogy(span, envelope, linestyle="--", linewidth=1.0,
                            label=f"{cert.kind} rate {cert.lam:.4g}")
    ax.set_xlabel("iteration n")
    ax.set_ylabel("value")
    ax.set_title("convergence")
    ax.grid(True, which="both", alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_iteration(trace, path):
    """Support size and accepted step size per iteration."""
    if not len(trace):
        return
    n = trace.column("n")
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 4.8), sharex=True)
    ax1.step(n, trace.column("support_size"), where="post", linewidth=1.2)
    ax1.set_ylabel("support size")
    ax1.grid(True, alpha=0.3)
    ax2.plot(n, trace.column("s_n"), linewidth=1.2)
    ax2.set_ylabel("step size")
    ax2.set_xlabel("iteration n")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
