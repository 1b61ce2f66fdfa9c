import json
from importlib import resources

import jsonschema
import numpy as np
import pytest

from topicstab.clustering import Clustering
from topicstab.embedding import TopicPool
from topicstab.report import (
    build_report,
    median_rank,
    metric_correlations,
    rank_labels,
    render_text_table,
    write_report_json,
    write_summary_csv,
)
from topicstab.stability import ClusterStability


def _stab(cid, rbo, spear=None, jac=None, sil=0.5, members=(0,)):
    defined = rbo is not None
    return ClusterStability(
        cluster_id=cid,
        members=list(members),
        top_words=[f"word{cid}{i}" for i in range(3)],
        mean_silhouette=sil,
        mean_rbo=rbo,
        mean_spearman=(spear if spear is not None else rbo) if defined else None,
        mean_jaccard=(jac if jac is not None else rbo) if defined else None,
        pair_scores=[],
    )


def _world(stabs):
    rows = sorted({m for s in stabs for m in s.members})
    t = max(rows) + 1
    pool = TopicPool(matrix=np.random.default_rng(0).random((t, 4)),
                     provenance=[(i // 2, i % 2) for i in range(t)])
    assignment = np.zeros(t, dtype=int)
    for s in stabs:
        for m in s.members:
            assignment[m] = s.cluster_id
    clustering = Clustering(k=len(stabs), medoids=np.arange(len(stabs)),
                            assignment=assignment,
                            silhouette=np.linspace(-0.2, 0.9, t),
                            total_deviation=1.0)
    return pool, clustering


def test_median_rank_convention():
    assert median_rank(20) == 11
    assert median_rank(5) == 3
    assert median_rank(3) == 2
    assert median_rank(2) == 2
    assert median_rank(1) == 1


def test_rank_labels_distinctness():
    assert rank_labels(1) == {1: "best"}
    assert rank_labels(2) == {1: "best", 2: "worst"}
    assert rank_labels(3) == {1: "best", 3: "worst", 2: "median"}
    labels20 = rank_labels(20)
    assert labels20[1] == "best" and labels20[20] == "worst" and labels20[11] == "median"


def test_report_orders_by_rbo_descending_undefined_last():
    stabs = [
        _stab(0, 0.3, members=(0, 1)),
        _stab(1, None, members=(2,)),
        _stab(2, 0.9, members=(3, 4)),
        _stab(3, 0.3, members=(5, 6)),
    ]
    pool, clustering = _world(stabs)
    report = build_report(stabs, pool, clustering, {"k": 4})
    got = [(c["cluster_id"], c["rank"]) for c in report["clusters"]]
    # rbo 0.9 first; tie at 0.3 broken by cluster id; undefined singleton last
    assert got == [(2, 1), (0, 2), (3, 3), (1, 4)]
    assert report["clusters"][0]["label"] == "best"
    assert report["clusters"][-1]["label"] == "worst"
    assert report["clusters"][1]["label"] is None
    assert report["clusters"][2]["label"] == "median"


def test_report_member_records_point_back_to_runs():
    stabs = [_stab(0, 0.5, members=(0, 1)), _stab(1, 0.4, members=(2, 3))]
    pool, clustering = _world(stabs)
    report = build_report(stabs, pool, clustering, {})
    member = report["clusters"][0]["members"][0]
    row = member["topic_row_index"]
    assert (member["run_id"], member["topic_index"]) == pool.provenance[row]
    assert member["silhouette"] == pytest.approx(clustering.silhouette[row])


def test_metric_correlations_perfect_monotone():
    # every column an affine function of the same sequence
    stabs = [_stab(i, rbo, sil=0.5 * rbo - 0.05, members=(2 * i, 2 * i + 1))
             for i, rbo in enumerate([0.2, 0.5, 0.8])]
    corr = metric_correlations(stabs)
    for key, value in corr.items():
        assert value == pytest.approx(1.0), key


def test_metric_correlations_degenerate_cases():
    # constant column -> None; single scored cluster -> None
    stabs = [_stab(0, 0.5, members=(0, 1)), _stab(1, 0.5, members=(2, 3))]
    corr = metric_correlations(stabs)
    assert corr["spearman_vs_rbo"] is None
    only_one = [_stab(0, 0.5, members=(0, 1)), _stab(1, None, members=(2,))]
    assert metric_correlations(only_one)["silhouette_vs_rbo"] is None


def test_report_json_is_byte_stable(tmp_path):
    stabs = [_stab(0, 0.5, members=(0, 1)), _stab(1, 0.25, members=(2, 3))]
    pool, clustering = _world(stabs)
    report = build_report(stabs, pool, clustering, {"k": 2, "alpha": 0.1})
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    write_report_json(report, p1)
    write_report_json(json.loads(p1.read_text()), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_report_json_serializes_none_as_null(tmp_path):
    stabs = [_stab(0, 0.5, members=(0, 1)), _stab(1, None, members=(2,))]
    pool, clustering = _world(stabs)
    report = build_report(stabs, pool, clustering, {})
    path = tmp_path / "r.json"
    write_report_json(report, path)
    payload = json.loads(path.read_text())
    assert payload["clusters"][-1]["mean_rbo"] is None
    assert "NaN" not in path.read_text()


def test_report_validates_against_shipped_schema(tmp_path):
    schema = json.loads(
        resources.files("topicstab.schemas").joinpath("report.schema.json").read_text())
    stabs = [_stab(0, 0.5, members=(0, 1)), _stab(1, None, members=(2,))]
    pool, clustering = _world(stabs)
    report = build_report(stabs, pool, clustering, {"k": 2})
    path = tmp_path / "r.json"
    write_report_json(report, path)
    jsonschema.validate(json.loads(path.read_text()), schema)


def test_summary_csv_layout(tmp_path):
    stabs = [_stab(0, 0.5, members=(0, 1)), _stab(1, None, members=(2,))]
    pool, clustering = _world(stabs)
    report = build_report(stabs, pool, clustering, {})
    path = tmp_path / "summary.csv"
    write_summary_csv(report, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0].startswith("rank,label,cluster_id,num_topics,")
    assert len(lines) == 3
    first = lines[1].split(",")
    assert first[0] == "1" and first[1] == "best"
    assert "word00 word01 word02" in lines[1]
    # undefined metrics stay empty, not 0
    assert ",,," not in lines[1]
    assert lines[2].split(",")[7] == ""


def test_text_table_mentions_labels_and_words():
    stabs = [_stab(0, 0.5, members=(0, 1)), _stab(1, 0.2, members=(2, 3))]
    pool, clustering = _world(stabs)
    report = build_report(stabs, pool, clustering, {})
    text = render_text_table(report)
    assert "best" in text and "worst" in text
    assert "word00" in text
    assert "metric correlations" in text
    detailed = render_text_table(report, details=True)
    assert "run " in detailed
    assert len(detailed.splitlines()) > len(text.splitlines())
