"""Render evaluation reports as PNG files.

Every function takes already-aggregated report objects and writes one
figure, returning the path.  Rendering uses the Agg backend so it works
headless; the delimited report files remain the primary output and the
figures are a convenience for eyeballing the same numbers.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import (
    AgreementCurve,
    MethodSearchStats,
    OverlapReport,
    TTestEntry,
)

__all__ = [
    "save_curve_figure",
    "save_ttest_figure",
    "save_overlap_figure",
    "save_search_figure",
]


def save_curve_figure(
    curves: Mapping[str, AgreementCurve],
    path: str | Path,
    title: str = "Matches against author keyphrases",
) -> Path:
    """Mean matching phrases as a function of the requested output size."""
    if not curves:
        raise ValueError("no curves to plot")
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, curve in curves.items():
        xs = list(range(1, curve.max_m + 1))
        ax.plot(xs, curve.means, marker="o", markersize=3, label=label)
    ax.set_xlabel("phrases requested")
    ax.set_ylabel("mean matching phrases")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return _save(fig, path)


def save_ttest_figure(
    entries: Sequence[TTestEntry],
    label: str,
    path: str | Path,
) -> Path:
    """Mean paired difference per output size with 95% error bars."""
    if not entries:
        raise ValueError("no t-test entries to plot")
    xs = list(range(1, len(entries) + 1))
    means = [e.mean for e in entries]
    halves = [e.half_width for e in entries]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.errorbar(xs, means, yerr=halves, fmt="o-", markersize=3, capsize=3)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_xlabel("phrases requested")
    ax.set_ylabel("mean difference")
    ax.set_title(label)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def save_overlap_figure(report: OverlapReport, path: str | Path) -> Path:
    """Stacked per-method bars for the matched and all-phrase partitions."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.5), sharey=True)
    for ax, (variant, buckets) in zip(
        axes, (("matched", report.matched), ("all phrases", report.all_phrases))
    ):
        positions = range(len(report.methods))
        bottoms = [0.0] * len(report.methods)

        def stack(values, label):
            ax.bar(positions, values, bottom=bottoms, label=label, width=0.6)
            for i, v in enumerate(values):
                bottoms[i] += v

        stack([buckets[m].shared_all for m in report.methods], "shared with all")
        for other in report.methods:
            values = [
                buckets[m].shared_one.get(other, 0.0) for m in report.methods
            ]
            stack(values, f"shared only with {other}")
        stack([buckets[m].unique for m in report.methods], "unique")
        ax.set_xticks(list(positions))
        ax.set_xticklabels(report.methods, rotation=15)
        ax.set_title(variant)
        ax.grid(True, axis="y", alpha=0.3)
    axes[0].set_ylabel("mean phrases per document")
    axes[1].legend(fontsize=8)
    return _save(fig, path)


def save_search_figure(
    stats_by_run: Mapping[str, MethodSearchStats], path: str | Path
) -> Path:
    """Specificity and generality rates per run with 95% error bars."""
    if not stats_by_run:
        raise ValueError("no search stats to plot")
    labels = list(stats_by_run)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.5), sharey=True)
    fields = (
        ("specificity", "specificity_half_width", "source doc in top hits"),
        ("generality", "generality_half_width", "more than 50 matches"),
    )
    for ax, (value_field, hw_field, title) in zip(axes, fields):
        values = [getattr(stats_by_run[l], value_field) for l in labels]
        halves = [getattr(stats_by_run[l], hw_field) for l in labels]
        ax.bar(range(len(labels)), values, yerr=halves, capsize=3, width=0.6)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=20, fontsize=8)
        ax.set_ylim(0.0, 1.05)
        ax.set_title(title)
        ax.grid(True, axis="y", alpha=0.3)
    axes[0].set_ylabel("probability")
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path
