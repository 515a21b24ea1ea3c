"""Matplotlib renderings of the delimited report tables.

Presentation only: every figure here is drawn from data the CLI has already
written as a delimited table, so plots can always be regenerated elsewhere.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import BinnedResiduals, ImportanceVector, ResidualTable
from .core import Target
from .trainer import SweepResult, TrainingReport

_SPLIT_COLORS = {"train": "tab:blue", "validation": "tab:orange", "test": "tab:green"}


def _save(fig, path):
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_history_figure(report: TrainingReport, path) -> None:
    """Training and validation loss per accepted iteration."""
    it = np.arange(len(report.train_losses))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(it, report.train_losses, label="training")
    ax.semilogy(it, report.validation_losses, label="validation")
    if report.stop_reason == "early_stopped":
        ax.axvline(report.best_validation_iteration, color="gray", ls="--", lw=0.8,
                   label="returned iterate")
    ax.set_xlabel("accepted iteration")
    ax.set_ylabel("sum of squared errors")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def save_scatter_figure(scatter, target: Target, r_by_split: dict[str, float], path) -> None:
    """Measured versus predicted normalized log values, one panel per split.

    `scatter` rows are (split, event_id, station_id, observed_nlog,
    predicted_nlog, observed, predicted).
    """
    splits = ["train", "validation", "test"]
    fig, axes = plt.subplots(1, 3, figsize=(12, 4), sharex=True, sharey=True)
    for ax, split in zip(axes, splits):
        obs = [row[3] for row in scatter if row[0] == split]
        pred = [row[4] for row in scatter if row[0] == split]
        ax.scatter(obs, pred, s=8, alpha=0.5, color=_SPLIT_COLORS[split])
        lo = min(min(obs), min(pred)) if obs else 0.0
        hi = max(max(obs), max(pred)) if obs else 1.0
        ax.plot([lo, hi], [lo, hi], color="k", lw=0.8)
        ax.set_title(f"{split} (R = {r_by_split[split]:.4f})")
        ax.set_xlabel(f"measured ln({target.value}) / divisor")
    axes[0].set_ylabel(f"predicted ln({target.value}) / divisor")
    fig.tight_layout()
    _save(fig, path)


def save_residual_figure(table: ResidualTable, binned: BinnedResiduals, path) -> None:
    """Residual scatter against rjb or vs30 with bin means and 90% CI."""
    x = table.rjb if binned.group_by == "rjb" else table.vs30
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.scatter(x, table.residuals, s=8, alpha=0.35, color="0.6", label="records")
    centers, means, los, his = [], [], [], []
    for b in binned.bins:
        if b.mean is None:
            continue
        centers.append(np.sqrt(b.low * b.high))
        means.append(b.mean)
        los.append(b.ci_low if b.ci_low is not None else b.mean)
        his.append(b.ci_high if b.ci_high is not None else b.mean)
    if centers:
        ax.plot(centers, means, "o-", color="tab:red", label="bin mean")
        ax.plot(centers, los, "-", color="tab:blue", lw=0.9, label="90% CI of mean")
        ax.plot(centers, his, "-", color="tab:blue", lw=0.9)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xscale("log")
    xlabel = "RJB (km)" if binned.group_by == "rjb" else "Vs30 (m/s)"
    ax.set_xlabel(xlabel)
    ax.set_ylabel(f"ln(observed / predicted {table.target.value})")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def save_curve_figure(curves, units_label: str, path) -> None:
    """Attenuation curves, one line per magnitude, on log-log axes."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for curve in curves:
        ax.loglog(curve.rjb, curve.values, label=f"Mw {curve.magnitude:g}")
    ax.set_xlabel("RJB (km)")
    ax.set_ylabel(f"{curves[0].target.value} ({units_label})")
    ax.set_title(f"Vs30 = {curves[0].vs30:g} m/s")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def save_importance_figure(importance: ImportanceVector, target: Target, path) -> None:
    """Bar chart of input-variable contributions."""
    labels = ["Mw", "Vs30", "RJB"]
    values = [importance.mw, importance.vs30, importance.rjb]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(labels, values, color=["tab:blue", "tab:orange", "tab:green"])
    for i, v in enumerate(values):
        ax.text(i, v, f"{v:.3f}", ha="center", va="bottom", fontsize=9)
    ax.set_ylabel("relative importance")
    ax.set_ylim(0, 1)
    ax.set_title(f"{target.value} model")
    fig.tight_layout()
    _save(fig, path)


def save_sweep_figure(result: SweepResult, path) -> None:
    """Train/test R-squared per hidden size, selected size marked."""
    ok = [en for en in result.entries if not en.failed]
    hs = [en.hidden_count for en in ok]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(hs, [en.r2_train for en in ok], "o-", label="train R^2")
    ax.plot(hs, [en.r2_test for en in ok], "s-", label="test R^2")
    ax.axvline(result.selected_hidden_count, color="gray", ls="--", lw=0.8,
               label=f"selected H = {result.selected_hidden_count}")
    ax.set_xlabel("hidden neurons")
    ax.set_ylabel("R^2")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
