"""Figure rendering for experiment outputs.

Every plot lands as a PNG next to the delimited data it visualizes; nothing
here is interactive.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update(
    {
        "figure.figsize": (6.0, 4.0),
        "figure.dpi": 110,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "font.size": 10,
        "legend.fontsize": 9,
    }
)


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_marginal(mean, std=None, overlays=None, *, kind, path, title, logy=False):
    """Mean distribution with one-sigma bars plus reference curves.

    ``mean=None`` draws the overlays alone (sweep-style comparison plots).
    """
    fig, ax = plt.subplots()
    if mean is not None:
        x = np.arange(len(mean))
        if std is not None and np.any(std > 0):
            ax.errorbar(x, mean, yerr=std, fmt="o", ms=3.5, capsize=2, label="simulation")
        else:
            ax.plot(x, mean, "o", ms=3.5, label="simulation" if overlays else None)
    for label, ys in (overlays or {}).items():
        ax.plot(np.arange(len(ys)), ys, "--", lw=1.2, label=label)
    if logy:
        ax.set_yscale("log")
        peak = mean if mean is not None else next(iter(overlays.values()))
        peak = np.asarray(peak, dtype=float)
        floor = max(1e-9, np.min(peak[peak > 0]) / 10) if np.any(peak > 0) else 1e-9
        ax.set_ylim(bottom=floor)
    ax.set_xlabel("number of children" if kind == "children" else "generation")
    ax.set_ylabel("probability")
    ax.set_title(title)
    if overlays or std is not None:
        ax.legend()
    _finish(fig, path)


def plot_parity(exact, approx, *, path, title):
    """Log-log scatter of approximated vs measured cell probabilities."""
    exact = np.asarray(exact, dtype=float).ravel()
    approx = np.asarray(approx, dtype=float).ravel()
    keep = (exact > 0) & (approx > 0)
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    ax.loglog(exact[keep], approx[keep], "o", ms=3, alpha=0.6)
    if keep.any():
        lo = min(exact[keep].min(), approx[keep].min())
        hi = max(exact[keep].max(), approx[keep].max())
        ax.loglog([lo, hi], [lo, hi], "k--", lw=1)
    ax.set_xlabel("measured probability")
    ax.set_ylabel("approximated probability")
    ax.set_title(title)
    _finish(fig, path)


def plot_curves(curves, *, path, title, n0=None):
    """Cumulative infections over time, one line per labelled run set."""
    fig, ax = plt.subplots()
    for label, curve in curves.items():
        ax.plot(np.arange(len(curve)), curve, lw=1.3, label=str(label))
    if n0 is not None:
        ax.axhline(n0, color="gray", lw=0.8, ls=":")
    ax.set_xlabel("tick")
    ax.set_ylabel("infected hosts")
    ax.set_title(title)
    if len(curves) > 1:
        ax.legend()
    _finish(fig, path)


def plot_detection(summary, analytic_curves, *, path, title):
    """Mean exposed fraction per strategy and accessed ratio.

    ``summary`` rows: (strategy, accessed_ratio, mean, stderr).
    ``analytic_curves``: label -> (ratios, values) reference lines.
    """
    fig, ax = plt.subplots()
    strategies = sorted({row[0] for row in summary})
    for strategy in strategies:
        rows = sorted(r for r in summary if r[0] == strategy)
        xs = [r[1] for r in rows]
        ys = [r[2] for r in rows]
        es = [r[3] for r in rows]
        ax.errorbar(xs, ys, yerr=es, fmt="o-", ms=4, capsize=3, label=f"{strategy} (simulated)")
    for label, (xs, ys) in (analytic_curves or {}).items():
        ax.plot(xs, ys, "--", lw=1.2, label=label)
    ax.set_xlabel("accessed ratio")
    ax.set_ylabel("exposed fraction")
    ax.set_title(title)
    ax.legend()
    _finish(fig, path)
