"""Figure rendering for the CLI report path (a PNG next to each table)."""

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _col(rows, name):
    # Saturated values become gaps rather than distorting the axes.
    return [r[name] if isinstance(r[name], (int, float)) and math.isfinite(r[name])
            else np.nan for r in rows]


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def rate_curves(rows, path):
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    xs = _col(rows, "x")
    for name, style in (("phi", "-"), ("psi", "--"), ("nu", ":")):
        ax.plot(xs, _col(rows, name), style, label=name, linewidth=2)
    ax.set_xlabel("x")
    ax.set_ylabel("rate")
    ax.set_title("Rate functions")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)


def limit_curves(rows, path):
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    qs = _col(rows, "q")
    ax.plot(qs, _col(rows, "growth_rate"), "-", label="growth rate", linewidth=2)
    ax.plot(qs, _col(rows, "free_energy"), "--", label="free energy")
    ax.plot(qs, _col(rows, "rem_f1"), ":", label="fixed-length free energy")
    ax.set_xlabel("q")
    ax.set_ylabel("value")
    ax.set_title("Limit curves")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)


def gamma_curves(rows, path):
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    qs = _col(rows, "q")
    ax.plot(qs, _col(rows, "gamma_bar"), "-o", label="gamma_bar (fixed length)")
    ax.plot(qs, _col(rows, "gamma_tilde"), "-s", label="gamma_tilde (random length)")
    ax.set_xlabel("q")
    ax.set_ylabel("limiting maximum")
    ax.set_title("Partial-sum maximum limits")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)


def interpolation_curve(rows, path):
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    alphas = [r["alpha"] for r in rows]
    vals = _col(rows, "value")
    finite = [(a, v) for a, v in zip(alphas, vals) if math.isfinite(a)]
    if finite:
        ax.semilogx([a for a, _ in finite], [v for _, v in finite], "-o",
                    label="interpolation rate")
    inf_rows = [v for a, v in zip(alphas, vals) if math.isinf(a)]
    if inf_rows:
        ax.axhline(inf_rows[0], linestyle="--", color="gray", label="alpha = inf")
    ax.set_xlabel("alpha")
    ax.set_ylabel("rate")
    ax.set_title("Interpolation family")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)


def critical_points(curve_xs, curves, marks, path):
    """Rate curves with their slope-matching points marked.

    curves: {label: values}; marks: {label: (q_cr, x0)}.
    """
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for label, ys in curves.items():
        ax.plot(curve_xs, [y if math.isfinite(y) else np.nan for y in ys],
                label=label, linewidth=2)
    for label, (q_cr, x0) in marks.items():
        if math.isfinite(q_cr) and math.isfinite(x0):
            ax.plot([x0], [q_cr], "k*", markersize=12)
            ax.annotate(f"{label}: q_cr={q_cr:.4g}", (x0, q_cr),
                        textcoords="offset points", xytext=(6, 6))
    ax.set_xlabel("x")
    ax.set_ylabel("rate")
    ax.set_title("Critical levels")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)


def replica_histogram(values, theory, path, title="Per-replica estimates"):
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ax.hist(values, bins=min(30, max(5, len(values) // 5)), alpha=0.7,
            label="replicas")
    ax.axvline(theory, color="k", linestyle="--", linewidth=2, label="theory")
    mean = sum(values) / len(values)
    ax.axvline(mean, color="C1", linestyle=":", linewidth=2, label="mean")
    ax.set_xlabel("value")
    ax.set_ylabel("count")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best")
    _save(fig, path)
