"""Figure builders: convergence curves with std bands, summary bar charts.

Both functions return the matplotlib Figure (so tests can inspect the data
layer) and write a deterministic image file when an output path is given.
"""

from __future__ import annotations

import json

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .curves import CurveSpec, load_rows, mean_band, setting_curves, smooth

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b",
           "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#ff7f0e", "#000000"]


def _save(fig, path):
    if path:
        fig.savefig(path, dpi=120, metadata={"Software": None})


def plot_convergence(csv_path: str, spec: CurveSpec):
    """One mean line + one +-1 std shaded band per requested setting."""
    rows = load_rows(csv_path)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for k, setting in enumerate(spec.settings):
        grid, curves = setting_curves(rows, setting, spec.split, spec.team)
        mean, std = mean_band(curves)
        if spec.smoothing > 1:
            mean = smooth(mean, spec.smoothing)
            std = smooth(std, spec.smoothing)
        color = _COLORS[k % len(_COLORS)]
        ax.plot(grid, mean, label=setting, color=color, lw=1.6)
        ax.fill_between(grid, mean - std, mean + std, color=color, alpha=0.2,
                        linewidth=0)
    ax.set_xlabel("training epoch")
    ax.set_ylabel(f"{spec.split} accuracy ({spec.team} team)")
    ax.set_ylim(0.0, 1.0)
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(alpha=0.25)
    fig.tight_layout()
    _save(fig, spec.out_path)
    return fig


_BAR_KEYS = [("winning_train_acc", "winning / train"),
             ("winning_test_acc", "winning / test"),
             ("losing_train_acc", "losing / train"),
             ("losing_test_acc", "losing / test")]


def plot_summary_bars(summary_path: str, out_path: str | None = "bars.png"):
    """Grouped accuracy bars (winning vs losing, train vs test) with std bars."""
    with open(summary_path) as fh:
        table = json.load(fh)
    if not isinstance(table, dict) or not table:
        raise ValueError("summary JSON must map setting ids to aggregate rows")
    settings = list(table)
    fig, ax = plt.subplots(figsize=(max(6, 1.4 * len(settings)), 4.5))
    width = 0.2
    xs = np.arange(len(settings))
    for j, (key, label) in enumerate(_BAR_KEYS):
        means, stds, mask = [], [], []
        for sid in settings:
            cell = table[sid].get(key)
            if cell is None:
                means.append(0.0)
                stds.append(0.0)
                mask.append(False)
                continue
            if not 0.0 <= cell["mean"] <= 1.0:
                raise ValueError(f"{sid}.{key}: accuracy outside [0, 1]")
            means.append(cell["mean"])
            stds.append(cell["std"])
            mask.append(True)
        offs = (j - 1.5) * width
        bars = ax.bar(xs + offs, means, width, yerr=stds, capsize=2,
                      label=label)
        for bar, ok in zip(bars, mask):
            if not ok:
                bar.set_height(0.0)
    ax.set_xticks(xs)
    ax.set_xticklabels(settings, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.legend(fontsize=8)
    ax.grid(axis="y", alpha=0.25)
    fig.tight_layout()
    _save(fig, out_path)
    return fig
