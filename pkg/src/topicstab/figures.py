"""Matplotlib figures rendered to files next to the report outputs."""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

log = logging.getLogger(__name__)

_METRICS = [
    ("mean_rbo", "RBO"),
    ("mean_spearman", "Spearman"),
    ("mean_jaccard", "Jaccard"),
    ("mean_silhouette", "silhouette"),
]


def render_figures(report: dict, out_dir) -> list:
    """Write the standard figures for a report; returns the created paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [
        _stability_bars(report, out_dir / "stability_by_cluster.png"),
        _silhouette_profile(report, out_dir / "silhouette_profile.png"),
    ]
    log.info("wrote %d figures to %s", len(paths), out_dir)
    return paths


def _stability_bars(report: dict, path: Path) -> Path:
    clusters = report["clusters"]
    n = len(clusters)
    x = np.arange(n)
    width = 0.8 / len(_METRICS)
    fig, ax = plt.subplots(figsize=(max(6.0, 0.55 * n + 2.5), 4.0))
    for j, (key, label) in enumerate(_METRICS):
        vals = [c[key] if c[key] is not None else np.nan for c in clusters]
        ax.bar(x + (j - (len(_METRICS) - 1) / 2) * width, vals, width, label=label)
    ax.set_xticks(x)
    ax.set_xticklabels([str(c["cluster_id"]) for c in clusters])
    ax.set_xlabel("cluster (ranked most to least stable)")
    ax.set_ylabel("mean pairwise score")
    ax.set_title("Per-cluster stability")
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.legend(fontsize="small", ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _silhouette_profile(report: dict, path: Path) -> Path:
    clusters = report["clusters"]
    fig, ax = plt.subplots(figsize=(6.0, max(4.0, 0.12 * sum(c["num_topics"] for c in clusters))))
    y = 0
    yticks, ylabels = [], []
    cmap = plt.get_cmap("tab20")
    for i, c in enumerate(clusters):
        vals = sorted((m["silhouette"] for m in c["members"]), reverse=True)
        ys = np.arange(y, y + len(vals))
        ax.barh(ys, vals, height=1.0, color=cmap(i % 20), edgecolor="none")
        yticks.append(y + len(vals) / 2)
        ylabels.append(f"c{c['cluster_id']}")
        y += len(vals) + 2
    ax.set_yticks(yticks)
    ax.set_yticklabels(ylabels)
    ax.invert_yaxis()
    ax.set_xlabel("silhouette")
    ax.set_title("Per-topic silhouettes by cluster")
    ax.axvline(0.0, color="black", linewidth=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
