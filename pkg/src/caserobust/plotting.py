"""Figures written next to reports.  Uses the non-interactive Agg backend."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_COLORS = ("#33638d", "#d8763c", "#6b6b6b")


def plot_report(report, path, title=None):
    """Grouped bars per scenario, one bar per report column."""
    labels = [r.scenario.label for r in report.rows]
    series = (
        ("Test (C)", [r.cased for r in report.rows]),
        ("Test (U)", [r.uncased for r in report.rows]),
        ("Avg", [r.average for r in report.rows]),
    )
    x = np.arange(len(labels))
    width = 0.26
    fig, ax = plt.subplots(figsize=(max(5.0, 1.3 * len(labels) + 1.5), 3.6))
    for k, ((name, values), color) in enumerate(zip(series, _COLORS)):
        ax.bar(x + (k - 1) * width, values, width, label=name, color=color)
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel(report.metric.value)
    ax.set_ylim(0, 100)
    ax.legend(fontsize=8, frameon=False, ncol=3, loc="upper center", bbox_to_anchor=(0.5, 1.12))
    if title:
        ax.set_title(title, fontsize=9, pad=24)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_loss_history(history, path):
    fig, ax = plt.subplots(figsize=(4.0, 2.8))
    ax.plot(np.arange(1, len(history) + 1), history, marker="o", ms=3, color=_COLORS[0])
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean BCE")
    ax.set_yscale("log")
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
