"""Headless figure rendering for the report paths.

Everything here draws to a file through the Agg backend; nothing is
shown interactively. One figure per call, axes handed back by a small
helper so the rc setup lives in exactly one place.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "figure.figsize": (6.4, 4.0),
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def new_axes():
    plt.rcParams.update(RC)
    return plt.subplots()


def save(fig, path: str) -> str:
    fig.savefig(path)
    plt.close(fig)
    return path


def sweep_figure(rows: np.ndarray, path: str) -> str:
    """Eigenvalue branches and the shift component against theta.

    rows: (n, 6) array of (theta, four ascending eigenvalues, xi_z).
    """
    rows = np.asarray(rows, dtype=float)
    fig, ax = new_axes()
    theta = rows[:, 0]
    for k in range(4):
        ax.plot(theta, rows[:, 1 + k], label=f"eigenvalue {k}")
    ax.plot(theta, rows[:, 5], "--", color="black", label="shift z")
    ax.axhline(0.0, color="black", linewidth=0.8, alpha=0.6)
    ax.set_xlabel("theta")
    ax.set_ylabel("spectrum of D(theta)")
    ax.legend(ncol=2)
    return save(fig, path)


def scan_figure(s_values, metrics, path: str) -> str:
    """Log-log scaling of the scan metrics against the joint scale."""
    s = np.asarray(s_values, dtype=float)
    fig, ax = new_axes()
    for key in ("noncp", "nonlin", "shift"):
        vals = np.array([m[key] for m in metrics])
        ax.loglog(s, np.maximum(vals, 1e-18), marker="o", label=key)
    ax.loglog(s, s ** 2 * 0.1, ":", color="gray", label="slope 2 guide")
    ax.set_xlabel("scale s")
    ax.set_ylabel("metric")
    ax.legend()
    return save(fig, path)


def tomo_figure(fits, path: str) -> str:
    """Residuals per template, log scale, with the minimum eigenvalue
    written above each bar."""
    fig, ax = new_axes()
    labels = [f["model"] for f in fits]
    residuals = [max(f["residual"], 1e-18) for f in fits]
    bars = ax.bar(range(len(fits)), residuals, color="steelblue")
    ax.set_yscale("log")
    ax.set_xticks(range(len(fits)))
    ax.set_xticklabels(labels, rotation=15, ha="right")
    ax.set_ylabel("max trace-norm misfit")
    for bar, f in zip(bars, fits):
        ax.text(bar.get_x() + bar.get_width() / 2, bar.get_height(),
                f"min eig {f['min_eigenvalue']:.2e}",
                ha="center", va="bottom", fontsize=7)
    return save(fig, path)
