"""File-target figure renderers for the report commands.

Everything draws through the Agg backend straight to PNG; nothing here
opens a window.  The renderers are only invoked when the command line
asks for figures, so importing the package never pulls in matplotlib.
"""

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be fixed first)

__all__ = [
    "plot_local_decomposition",
    "plot_det_ratios",
    "plot_ratio_residuals",
]

_METADATA = {"Software": "heightlab"}


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, name)
    fig.savefig(path, dpi=120, metadata=_METADATA)
    plt.close(fig)
    return path


def plot_local_decomposition(rows, out_dir, name="height_local.png"):
    """Bar chart of the local height terms, one bar per place."""
    labels = [row["place"] for row in rows]
    values = [float(row["value"]) for row in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(values)), values, color="#4878a8")
    ax.axhline(0, color="black", linewidth=0.8)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels)
    ax.set_xlabel("place")
    ax.set_ylabel("local height")
    ax.set_title("local decomposition")
    fig.tight_layout()
    return _save(fig, out_dir, name)


def plot_det_ratios(samples, out_dir, name="md_ratios.png"):
    """Determinant-to-height-power ratios against sample height."""
    heights = [float(s["height"]) for s in samples]
    ratios = [float(s["ratio"]) for s in samples]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.axhspan(0.5, 1.5, color="#88aa88", alpha=0.25, label="pass window")
    ax.plot(heights, ratios, "o", color="#a85048")
    ax.set_xlabel("bundle height")
    ax.set_ylabel("det ratio")
    ax.set_title("determinant asymptotics")
    ax.legend(loc="best")
    fig.tight_layout()
    return _save(fig, out_dir, name)


def plot_ratio_residuals(samples, out_dir, name="diag_residuals.png"):
    """Residuals of the degree-ratio law against denominator height."""
    heights = [float(s["h_den"]) for s in samples]
    residuals = [float(s["residual"]) for s in samples]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.axhline(0, color="black", linewidth=0.8)
    ax.plot(heights, residuals, "o", color="#4878a8")
    ax.set_xlabel("height")
    ax.set_ylabel("residual")
    ax.set_title("degree-ratio residuals")
    fig.tight_layout()
    return _save(fig, out_dir, name)
