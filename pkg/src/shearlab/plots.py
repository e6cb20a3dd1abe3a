"""Figure rendering for counting runs (SVG via matplotlib, deterministic)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

matplotlib.rcParams["svg.hashsalt"] = "shearlab"


def save_loglog_counts(path, radii, counts, fit=None, title=None):
    """Log-log scatter of counts against radius, with an optional fitted line
    (slope, intercept in log-log coordinates)."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    pts = [(r, c) for r, c in zip(radii, counts) if c > 0]
    if pts:
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o", ms=4, label="counts")
    if fit is not None:
        import math

        slope, intercept = fit
        rs = [r for r, c in pts] or [1.0, 10.0]
        xs = [min(rs), max(rs)]
        ys = [math.exp(intercept) * x**slope for x in xs]
        ax.loglog(xs, ys, "-", lw=1, label=f"fit slope {slope:.3f}")
    ax.set_xlabel("L")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def save_residual_plot(path, t_grid, residuals, title=None):
    """Semilog residual decay along a ray."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.semilogy(t_grid, [max(r, 1e-18) for r in residuals], "o-", ms=3, lw=1)
    ax.set_xlabel("t")
    ax.set_ylabel("|F - (linear + c)|")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
