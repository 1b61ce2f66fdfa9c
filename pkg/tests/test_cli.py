"""End-to-end exercises of the five pipeline subcommands on a tiny corpus."""

import json
from importlib import resources

import jsonschema
import numpy as np
import pytest
import synthdata

from topicstab import cli
from topicstab.lda import load_model

VOCAB = 18
K = 3


@pytest.fixture(scope="module")
def world(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_world")
    rng = np.random.default_rng(7)
    phi = synthdata.block_topics(K, VOCAB, decay=0.8)
    docs = synthdata.generate_docs(phi, n_docs=60, doc_len=20,
                                   theta_conc=0.2, rng=rng)
    corpus_path = root / "corpus.txt"
    emb_path = root / "embeddings.txt"
    synthdata.write_text_corpus(docs, VOCAB, corpus_path)
    synthdata.write_embedding_file(VOCAB, 8, emb_path, seed=3)
    return {"corpus": str(corpus_path), "embeddings": str(emb_path)}


def _preprocess(world, out, extra=()):
    return cli.main(["preprocess", "--input", world["corpus"],
                     "--output-dir", str(out), "--min-count", "2",
                     "--max-doc-frac", "1.0", *extra])


def _run(world, out, extra=()):
    return cli.main(["run", "--output-dir", str(out), "--k", str(K),
                     "--n-runs", "3", "--iterations", "30",
                     "--alpha", "0.2", "--beta", "0.05", *extra])


def _cluster(world, out, extra=()):
    return cli.main(["cluster", "--output-dir", str(out), "--k", str(K),
                     "--embeddings", world["embeddings"], *extra])


@pytest.fixture(scope="module")
def pipeline_dir(world, tmp_path_factory):
    out = tmp_path_factory.mktemp("pipeline")
    assert _preprocess(world, out) == 0
    assert _run(world, out) == 0
    assert _cluster(world, out) == 0
    assert cli.main(["report", "--output-dir", str(out), "--k", str(K)]) == 0
    return out


def test_preprocess_artifacts_and_summary(world, tmp_path, capsys):
    assert _preprocess(world, tmp_path) == 0
    out = capsys.readouterr().out
    assert "documents: 60" in out
    assert "vocabulary: 18 words" in out
    assert (tmp_path / "vocabulary.tsv").exists()
    assert (tmp_path / "corpus.json").exists()


def test_run_writes_one_model_per_run(pipeline_dir):
    paths = sorted((pipeline_dir / "models").glob("run_*.npz"))
    assert [p.name for p in paths] == ["run_00000.npz", "run_00001.npz", "run_00002.npz"]
    model, meta = load_model(paths[0])
    assert model.config.k == K and model.config.alpha == 0.2
    assert "config_hash" in meta


def test_run_reuses_cached_models(world, tmp_path, capsys):
    _preprocess(world, tmp_path)
    _run(world, tmp_path)
    first = {p.name: p.stat().st_mtime_ns
             for p in (tmp_path / "models").glob("run_*.npz")}
    capsys.readouterr()
    assert _run(world, tmp_path) == 0
    assert "(0 fitted, 3 cached)" in capsys.readouterr().out
    second = {p.name: p.stat().st_mtime_ns
              for p in (tmp_path / "models").glob("run_*.npz")}
    assert first == second
    # changed hyperparameter invalidates every cached fit
    assert _run(world, tmp_path, extra=["--alpha", "0.9"]) == 0
    assert "(3 fitted, 0 cached)" in capsys.readouterr().out


def test_cluster_artifacts(pipeline_dir):
    saved = json.loads((pipeline_dir / "clustering.json").read_text())
    assert saved["k"] == K
    assert len(saved["assignment"]) == 3 * K
    assert len(saved["provenance"]) == 3 * K
    assert saved["embedding_coverage"] == 1.0
    lines = (pipeline_dir / "clusters.csv").read_text().strip().splitlines()
    assert lines[0] == "topic_row_index,run_id,topic_index,cluster_id,silhouette"
    assert len(lines) == 3 * K + 1


def test_report_artifacts(pipeline_dir):
    for name in ("report.json", "summary.csv", "report.txt"):
        assert (pipeline_dir / name).exists(), name
    figures = sorted(p.name for p in (pipeline_dir / "figures").glob("*.png"))
    assert figures == ["silhouette_profile.png", "stability_by_cluster.png"]


def test_report_validates_against_schema(pipeline_dir):
    schema = json.loads(
        resources.files("topicstab.schemas").joinpath("report.schema.json").read_text())
    report = json.loads((pipeline_dir / "report.json").read_text())
    jsonschema.validate(report, schema)
    assert report["num_clusters"] == K


def test_report_config_omits_paths_and_reflects_fitted_models(pipeline_dir):
    config = json.loads((pipeline_dir / "report.json").read_text())["config"]
    for key in ("input", "embeddings", "output_dir", "jobs", "figures", "details"):
        assert key not in config
    assert config["alpha"] == 0.2
    assert config["beta"] == 0.05
    assert config["iterations"] == 30


def test_tune_then_run_uses_tuned_params(world, tmp_path, capsys):
    _preprocess(world, tmp_path)
    code = cli.main(["tune", "--output-dir", str(tmp_path), "--k", str(K),
                     "--de-population", "4", "--de-generations", "1",
                     "--tuning-iterations", "5", "--foldin-iterations", "3"])
    assert code == 0
    assert "tuned alpha=" in capsys.readouterr().out
    tuned = json.loads((tmp_path / "tuned_params.json").read_text())
    assert set(tuned) == {"alpha", "beta", "objective"}
    trace = (tmp_path / "tuning_trace.csv").read_text().strip().splitlines()
    assert trace[0] == "generation,alpha,beta,objective"
    assert len(trace) == 1 + 4 * (1 + 1)

    assert _run(world, tmp_path, extra=["--tune"]) == 0
    model, _ = load_model(tmp_path / "models" / "run_00000.npz")
    assert model.config.alpha == tuned["alpha"]
    assert model.config.beta == tuned["beta"]


def test_cluster_before_run_exits_4(world, tmp_path, capsys):
    _preprocess(world, tmp_path)
    assert _cluster(world, tmp_path) == 4
    assert "topicstab run" in capsys.readouterr().err


def test_report_before_cluster_exits_4(world, tmp_path, capsys):
    _preprocess(world, tmp_path)
    _run(world, tmp_path)
    assert cli.main(["report", "--output-dir", str(tmp_path)]) == 4
    assert "topicstab cluster" in capsys.readouterr().err


def test_stale_clustering_rejected(world, tmp_path, capsys):
    _preprocess(world, tmp_path)
    _run(world, tmp_path)
    _cluster(world, tmp_path)
    # report without figure rendering still writes the delimited outputs
    assert cli.main(["report", "--output-dir", str(tmp_path),
                     "--no-figures"]) == 0
    assert not (tmp_path / "figures").exists()
    capsys.readouterr()
    # one extra model invalidates the stored clustering
    assert _run(world, tmp_path, extra=["--n-runs", "4"]) == 0
    assert cli.main(["report", "--output-dir", str(tmp_path)]) == 4
    assert "rerun" in capsys.readouterr().err


def test_unknown_config_key_exits_3(world, tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("minn_count = 2\n")
    assert cli.main(["preprocess", "--config", str(cfg),
                     "--input", world["corpus"],
                     "--output-dir", str(tmp_path)]) == 3
    assert "minn_count" in capsys.readouterr().err


def test_invalid_k_exits_3(world, tmp_path):
    _preprocess(world, tmp_path)
    assert cli.main(["run", "--output-dir", str(tmp_path), "--k", "1"]) == 3


def test_preprocess_without_input_exits_3(tmp_path):
    assert cli.main(["preprocess", "--output-dir", str(tmp_path)]) == 3


def test_overaggressive_pruning_exits_10(world, tmp_path):
    assert _preprocess(world, tmp_path, extra=["--min-count", "100000"]) == 10


def test_malformed_embeddings_exit_30(world, pipeline_dir, tmp_path, capsys):
    bad = tmp_path / "bad_vectors.txt"
    bad.write_text("w000 0.1 0.2\nw001 0.1\n")
    code = cli.main(["cluster", "--output-dir", str(pipeline_dir),
                     "--k", str(K), "--embeddings", str(bad)])
    assert code == 30
    assert "bad_vectors.txt:2:" in capsys.readouterr().err


def test_config_file_values_apply_and_flags_override(world, tmp_path):
    cfg = tmp_path / "pipe.cfg"
    cfg.write_text("min_count = 100000\nmax_doc_frac = 1.0\n")
    # file value alone prunes everything away
    assert cli.main(["preprocess", "--config", str(cfg),
                     "--input", world["corpus"],
                     "--output-dir", str(tmp_path)]) == 10
    # explicit flag beats the file value
    assert cli.main(["preprocess", "--config", str(cfg),
                     "--input", world["corpus"], "--min-count", "2",
                     "--output-dir", str(tmp_path)]) == 0


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
