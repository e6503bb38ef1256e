"""Report figures written next to the CSV reports."""

from __future__ import annotations

import math
from collections import Counter
from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .discovery import ValidationReport
from .predictor.pcr import EvaluationReport
from .selector import Ranking

PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02")


def _save(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    return path


def parity_figure(report: EvaluationReport, path: str | Path) -> Path:
    """Predicted against observed QoS, one panel per property."""
    if report.predictions is None or report.observations is None:
        raise ValueError("report carries no predictions to plot")
    names = report.target_names
    ncols = min(3, len(names))
    nrows = math.ceil(len(names) / ncols)
    fig = Figure(figsize=(4 * ncols, 3.6 * nrows), layout="constrained")
    axes = fig.subplots(nrows, ncols, squeeze=False).ravel()
    for j, name in enumerate(names):
        ax = axes[j]
        obs, pred = report.observations[:, j], report.predictions[:, j]
        lo = float(min(obs.min(), pred.min()))
        hi = float(max(obs.max(), pred.max()))
        ax.plot([lo, hi], [lo, hi], color="0.6", lw=1, ls="--")
        ax.scatter(obs, pred, s=14, color=PALETTE[j % len(PALETTE)], alpha=0.8)
        ax.set_title(f"{name}\nMAE {report.mae[name]:.3g}  RMSE {report.rmse[name]:.3g}", fontsize=9)
        ax.set_xlabel("observed")
        ax.set_ylabel("predicted")
    for ax in axes[len(names):]:
        ax.set_visible(False)
    scope = "held-out rows" if report.ratio is not None else "all rows"
    fig.suptitle(f"evaluation on {scope}, N={report.n}, k={report.k}")
    return _save(fig, path)


def ranking_figure(ranking: Ranking, path: str | Path) -> Path:
    """Stacked weighted leaf contributions to each candidate's total score."""
    services = ranking.services
    leaves = ranking.leaves
    weights = ranking.weights or (1.0 / len(leaves),) * len(leaves)
    fig = Figure(figsize=(7, 0.45 * len(services) + 1.5))
    ax = fig.subplots()
    y = np.arange(len(services))[::-1]
    left = np.zeros(len(services))
    for i, (leaf, w) in enumerate(zip(leaves, weights)):
        part = np.array([w * s.leaf_scores[leaf.property] for s in services])
        ax.barh(y, part, left=left, color=PALETTE[i % len(PALETTE)], label=f"{leaf.property} ({w:.2f})")
        left += part
    ax.set_yticks(y, [s.ws_id for s in services])
    ax.set_xlim(0, 1)
    ax.set_xlabel("QoS score")
    ax.legend(loc="lower right", fontsize=8)
    return _save(fig, path)


def validation_figure(report: ValidationReport, path: str | Path) -> Path:
    counts = Counter(e.category for e in report.entries)
    labels = sorted(counts, key=lambda c: (c != "ok", c))
    fig = Figure(figsize=(5, 3))
    ax = fig.subplots()
    ax.bar(labels, [counts[c] for c in labels], color=[PALETTE[0] if c == "ok" else PALETTE[1] for c in labels])
    ax.set_ylabel("services")
    ax.set_title(f"WSDL link check ({len(report.entries)} URLs)")
    return _save(fig, path)


def reputation_figure(rows: list[tuple[str, int, int]], path: str | Path) -> Path:
    """Credibility and usage count per service as stacked bars (the literal score)."""
    fig = Figure(figsize=(7, 0.4 * len(rows) + 1.5))
    ax = fig.subplots()
    y = np.arange(len(rows))[::-1]
    cred = np.array([r[1] for r in rows], dtype=float)
    usage = np.array([r[2] for r in rows], dtype=float)
    ax.barh(y, cred, color=PALETTE[2], label="credibility")
    ax.barh(y, usage, left=cred, color=PALETTE[4], label="usage count")
    ax.set_yticks(y, [r[0] for r in rows])
    ax.set_xlabel("reputation")
    ax.legend(loc="lower right", fontsize=8)
    return _save(fig, path)
