"""Report assembly: one record per cluster, ranked by stability.

Clusters are ordered by mean RBO descending (undefined means sort last,
ties broken by cluster id). Rank landmarks get labels: best is rank 1,
worst is the last rank, median is rank ceil((c + 1) / 2); a label is only
attached when it lands on a distinct cluster.
"""

from __future__ import annotations

import json
from itertools import combinations

from .stability import pearson

METRIC_KEYS = ("silhouette", "spearman", "jaccard", "rbo")

REPORT_FORMAT_VERSION = 1


def _sort_key(stab):
    # descending RBO; clusters without a pairwise score go last
    undefined = stab.mean_rbo is None
    return (undefined, -(stab.mean_rbo or 0.0), stab.cluster_id)


def median_rank(c: int) -> int:
    """Middle rank of c clusters ordered best to worst: ceil((c + 1) / 2)."""
    return (c + 2) // 2


def rank_labels(c: int) -> dict:
    labels = {1: "best"}
    if c >= 2:
        labels[c] = "worst"
    mid = median_rank(c)
    if mid not in labels:
        labels[mid] = "median"
    return labels


def build_report(stabilities, pool, clustering, config_summary: dict) -> dict:
    """Compose the JSON-able report dict (all values native Python types)."""
    ordered = sorted(stabilities, key=_sort_key)
    labels = rank_labels(len(ordered))
    clusters = []
    for rank, stab in enumerate(ordered, start=1):
        members = []
        for row in stab.members:
            run_id, topic_idx = pool.provenance[row]
            members.append({
                "topic_row_index": int(row),
                "run_id": int(run_id),
                "topic_index": int(topic_idx),
                "silhouette": float(clustering.silhouette[row]),
            })
        pairs = [
            {
                "row_a": int(p.row_a),
                "row_b": int(p.row_b),
                "rbo": float(p.rbo),
                "spearman": float(p.spearman),
                "jaccard": float(p.jaccard),
            }
            for p in stab.pair_scores
        ]
        clusters.append({
            "cluster_id": int(stab.cluster_id),
            "rank": rank,
            "label": labels.get(rank),
            "num_topics": len(stab.members),
            "top_words": list(stab.top_words),
            "mean_silhouette": float(stab.mean_silhouette),
            "mean_rbo": None if stab.mean_rbo is None else float(stab.mean_rbo),
            "mean_spearman": None if stab.mean_spearman is None else float(stab.mean_spearman),
            "mean_jaccard": None if stab.mean_jaccard is None else float(stab.mean_jaccard),
            "members": members,
            "pairs": pairs,
        })
    return {
        "version": REPORT_FORMAT_VERSION,
        "config": config_summary,
        "num_clusters": len(clusters),
        "clusters": clusters,
        "metric_correlations": metric_correlations(ordered),
    }


def metric_correlations(stabilities) -> dict:
    """Pearson correlation of each metric pair across clusters.

    Only clusters with defined pairwise means participate; pairs with fewer
    than 2 such clusters, or with a constant column, come back as None.
    """
    scored = [s for s in stabilities if s.mean_rbo is not None]
    columns = {
        "silhouette": [s.mean_silhouette for s in scored],
        "spearman": [s.mean_spearman for s in scored],
        "jaccard": [s.mean_jaccard for s in scored],
        "rbo": [s.mean_rbo for s in scored],
    }
    out = {}
    for a, b in combinations(METRIC_KEYS, 2):
        key = f"{a}_vs_{b}"
        try:
            out[key] = pearson(columns[a], columns[b])
        except ValueError:
            out[key] = None
    return out


def write_report_json(report: dict, path) -> None:
    """Canonical serialization: sorted keys, fixed separators, trailing newline.

    Identical report dicts produce byte-identical files.
    """
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2, separators=(",", ": "),
                  allow_nan=False)
        fh.write("\n")


def write_summary_csv(report: dict, path) -> None:
    """One delimited row per cluster, in rank order."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([
            "rank", "label", "cluster_id", "num_topics",
            "mean_silhouette", "mean_spearman", "mean_jaccard", "mean_rbo",
            "top_words",
        ])
        for c in report["clusters"]:
            writer.writerow([
                c["rank"],
                c["label"] or "",
                c["cluster_id"],
                c["num_topics"],
                _fmt(c["mean_silhouette"]),
                _fmt(c["mean_spearman"]),
                _fmt(c["mean_jaccard"]),
                _fmt(c["mean_rbo"]),
                " ".join(c["top_words"]),
            ])


def _fmt(value, places: int = 4) -> str:
    return "" if value is None else f"{value:.{places}f}"


def render_text_table(report: dict, details: bool = False) -> str:
    """Human-readable summary; one line per cluster plus a correlation footer."""
    lines = []
    header = (f"{'rank':>4}  {'label':<6}  {'cluster':>7}  {'topics':>6}  "
              f"{'sil':>7}  {'spear':>7}  {'jacc':>7}  {'rbo':>7}  top words")
    lines.append(header)
    lines.append("-" * len(header))
    for c in report["clusters"]:
        lines.append(
            f"{c['rank']:>4}  {(c['label'] or ''):<6}  {c['cluster_id']:>7}  "
            f"{c['num_topics']:>6}  {_fmt(c['mean_silhouette'], 3):>7}  "
            f"{_fmt(c['mean_spearman'], 3):>7}  {_fmt(c['mean_jaccard'], 3):>7}  "
            f"{_fmt(c['mean_rbo'], 3):>7}  {', '.join(c['top_words'])}"
        )
        if details:
            for m in c["members"]:
                lines.append(
                    f"{'':>4}  {'':<6}  row {m['topic_row_index']:>5}  "
                    f"run {m['run_id']:>3} topic {m['topic_index']:>3}  "
                    f"sil {m['silhouette']:+.3f}"
                )
    lines.append("")
    corr = report["metric_correlations"]
    pairs = ", ".join(
        f"{k}={_fmt(v, 3) or 'n/a'}" for k, v in sorted(corr.items())
    )
    lines.append(f"metric correlations across clusters: {pairs}")
    return "\n".join(lines) + "\n"
