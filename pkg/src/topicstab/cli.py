"""Command-line pipeline: preprocess -> (tune) -> run -> cluster -> report.

Each stage persists its outputs under the configured output directory and
later stages load them back, so stages can run in separate invocations:

    vocabulary.tsv, corpus.json      preprocess
    tuned_params.json, tuning_trace.csv   tune
    models/run_NNNNN.npz             run (resumable per run)
    clustering.json, clusters.csv    cluster
    report.json, summary.csv, report.txt, figures/   report
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import Clustering, k_medoids, pairwise_distances, write_assignment_csv
from .config import PipelineConfig, build_config, parse_config_file
from .corpus import (
    Corpus,
    DEFAULT_STOPWORDS,
    Vocabulary,
    build_vocabulary,
    encode,
    load_stopwords,
    read_documents,
    tokenize,
)
from .embedding import load_embeddings, pool_topics, project, with_weights
from .errors import ConfigError, MissingArtifactError, TopicStabError
from .lda import LdaConfig, fit, load_model, save_model
from .report import build_report, render_text_table, write_report_json, write_summary_csv
from .stability import RboParams, cluster_stability, relevance_matrix
from .tuning import DeConfig, tune_hyperparams, write_trace_csv

log = logging.getLogger(__name__)

# config fields whose values do not change the science; excluded from the
# report's embedded configuration so reports stay byte-comparable across
# machines and directories
_NON_SEMANTIC_KEYS = {
    "input", "embeddings", "output_dir", "extra_stopwords",
    "jobs", "figures", "details",
}


def _out(cfg: PipelineConfig) -> Path:
    return Path(cfg.output_dir)


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(f"{path} not found; run `topicstab {hint}` first")
    return path


def _load_vocabulary(cfg) -> Vocabulary:
    return Vocabulary.load_tsv(_require(_out(cfg) / "vocabulary.tsv", "preprocess"))


def _load_corpus(cfg) -> Corpus:
    vocab = _load_vocabulary(cfg)
    return Corpus.load_json(_require(_out(cfg) / "corpus.json", "preprocess"), vocab)


def _corpus_fingerprint(cfg) -> str:
    path = _require(_out(cfg) / "corpus.json", "preprocess")
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _run_hash(run_cfg: LdaConfig, corpus_sha: str) -> str:
    payload = json.dumps({"config": asdict(run_cfg), "corpus": corpus_sha},
                         sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _effective_alpha_beta(cfg) -> tuple[float, float]:
    if not cfg.tune:
        return cfg.alpha, cfg.beta
    path = _require(_out(cfg) / "tuned_params.json", "tune")
    with open(path, encoding="utf-8") as fh:
        tuned = json.load(fh)
    return float(tuned["alpha"]), float(tuned["beta"])


# ---------------------------------------------------------------- commands

def cmd_preprocess(cfg: PipelineConfig) -> int:
    if not cfg.input:
        raise ConfigError("preprocess needs an input file (--input or `input =` in the config)")
    ids, texts = read_documents(cfg.input)
    token_docs = [tokenize(t) for t in texts]
    stopwords = DEFAULT_STOPWORDS
    if cfg.extra_stopwords:
        stopwords = stopwords | load_stopwords(cfg.extra_stopwords)
    vocab = build_vocabulary(token_docs, min_count=cfg.min_count,
                             max_doc_frac=cfg.max_doc_frac, stopwords=stopwords)
    corpus = encode(token_docs, vocab, ids=ids)
    out = _out(cfg)
    out.mkdir(parents=True, exist_ok=True)
    vocab.save_tsv(out / "vocabulary.tsv")
    corpus.save_json(out / "corpus.json")
    print(f"documents: {corpus.num_documents}")
    print(f"vocabulary: {len(vocab)} words")
    print(f"tokens kept: {corpus.total_tokens}")
    print(f"empty documents: {corpus.num_empty_documents}")
    return 0


def cmd_tune(cfg: PipelineConfig) -> int:
    corpus = _load_corpus(cfg)
    de = DeConfig(
        population=cfg.de_population, cr=cfg.de_cr, f=cfg.de_f,
        generations=cfg.de_generations,
        bounds=((cfg.de_bound_low, cfg.de_bound_high),
                (cfg.de_bound_low, cfg.de_bound_high)),
        seed=cfg.base_seed,
    )
    result = tune_hyperparams(
        corpus, cfg.k, de,
        foldin_iterations=cfg.foldin_iterations,
        tuning_iterations=cfg.tuning_iterations,
        holdout_frac=cfg.holdout_frac,
    )
    out = _out(cfg)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "tuned_params.json", "w", encoding="utf-8") as fh:
        json.dump({"alpha": result.alpha, "beta": result.beta,
                   "objective": result.de.best_objective}, fh, sort_keys=True, indent=2)
        fh.write("\n")
    write_trace_csv(result.de, out / "tuning_trace.csv")
    print(f"tuned alpha={result.alpha:.6g} beta={result.beta:.6g} "
          f"(held-out perplexity {result.de.best_objective:.4f})")
    return 0


def cmd_run(cfg: PipelineConfig) -> int:
    corpus = _load_corpus(cfg)
    alpha, beta = _effective_alpha_beta(cfg)
    corpus_sha = _corpus_fingerprint(cfg)
    models_dir = _out(cfg) / "models"
    models_dir.mkdir(parents=True, exist_ok=True)

    def run_path(i: int) -> Path:
        return models_dir / f"run_{i:05d}.npz"

    todo = []
    for i in range(cfg.n_runs):
        run_cfg = LdaConfig(k=cfg.k, alpha=alpha, beta=beta,
                            iterations=cfg.iterations, seed=cfg.base_seed + i)
        expect = _run_hash(run_cfg, corpus_sha)
        path = run_path(i)
        if path.exists():
            try:
                _, meta = load_model(path)
            except Exception:
                meta = {}
            if meta.get("config_hash") == expect:
                log.info("run %d cached (%s)", i, path.name)
                continue
            log.info("run %d stale, refitting", i)
        todo.append((i, run_cfg, expect))

    def fit_one(job):
        i, run_cfg, expect = job
        model = fit(corpus, run_cfg)
        model.run_id = i
        save_model(model, run_path(i), extra_meta={"config_hash": expect})
        log.info("run %d/%d done (seed %d)", i + 1, cfg.n_runs, run_cfg.seed)

    if cfg.jobs > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            list(pool.map(fit_one, todo))
    else:
        for job in todo:
            fit_one(job)
    print(f"models ready: {cfg.n_runs} ({len(todo)} fitted, "
          f"{cfg.n_runs - len(todo)} cached) in {models_dir}")
    return 0


def _load_models(cfg):
    models_dir = _out(cfg) / "models"
    paths = sorted(models_dir.glob("run_*.npz")) if models_dir.is_dir() else []
    if len(paths) < 2:
        raise MissingArtifactError(
            f"need at least 2 fitted models in {models_dir}; run `topicstab run` first"
        )
    return [load_model(p)[0] for p in paths]


def cmd_cluster(cfg: PipelineConfig) -> int:
    if not cfg.embeddings:
        raise ConfigError("cluster needs an embeddings file (--embeddings or config)")
    vocab = _load_vocabulary(cfg)
    models = _load_models(cfg)
    pool = pool_topics(models)
    emb = load_embeddings(cfg.embeddings, vocab)
    vectors = project(pool, emb)
    dist = pairwise_distances(vectors, metric=cfg.metric)
    clustering = k_medoids(dist, cfg.k, seed=cfg.base_seed)
    out = _out(cfg)
    write_assignment_csv(clustering, pool.provenance, out / "clusters.csv")
    payload = {
        "version": 1,
        "k": clustering.k,
        "metric": cfg.metric,
        "embedding_dimension": emb.dimension,
        "embedding_coverage": emb.coverage,
        "medoids": clustering.medoids.tolist(),
        "assignment": clustering.assignment.tolist(),
        "silhouette": clustering.silhouette.tolist(),
        "total_deviation": clustering.total_deviation,
        "provenance": [list(pv) for pv in pool.provenance],
    }
    with open(out / "clustering.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")
    print(f"clustered {pool.matrix.shape[0]} topics into {clustering.k} clusters "
          f"(total deviation {clustering.total_deviation:.4f}, "
          f"embedding coverage {emb.coverage:.1%})")
    return 0


def cmd_report(cfg: PipelineConfig) -> int:
    vocab = _load_vocabulary(cfg)
    models = _load_models(cfg)
    pool = pool_topics(models)
    path = _require(_out(cfg) / "clustering.json", "cluster")
    with open(path, encoding="utf-8") as fh:
        saved = json.load(fh)
    if [list(pv) for pv in pool.provenance] != saved["provenance"]:
        raise MissingArtifactError(
            "clustering.json does not match the current models; rerun `topicstab cluster`"
        )
    clustering = Clustering(
        k=int(saved["k"]),
        medoids=np.asarray(saved["medoids"], dtype=np.int64),
        assignment=np.asarray(saved["assignment"], dtype=np.int64),
        silhouette=np.asarray(saved["silhouette"], dtype=np.float64),
        total_deviation=float(saved["total_deviation"]),
    )
    if cfg.relevance_lambda is not None:
        pool = with_weights(pool, relevance_matrix(
            pool.matrix, vocab.word_marginals(), cfg.relevance_lambda))
    stabilities = cluster_stability(
        pool, clustering, vocab, RboParams(p=cfg.rbo_p, d=cfg.depth))

    summary = {k: v for k, v in asdict(cfg).items() if k not in _NON_SEMANTIC_KEYS}
    fitted = models[0].config
    summary["alpha"] = fitted.alpha
    summary["beta"] = fitted.beta
    summary["k"] = fitted.k
    summary["iterations"] = fitted.iterations
    report = build_report(stabilities, pool, clustering, summary)

    out = _out(cfg)
    write_report_json(report, out / "report.json")
    write_summary_csv(report, out / "summary.csv")
    text = render_text_table(report, details=cfg.details)
    (out / "report.txt").write_text(text, encoding="utf-8")
    if cfg.figures:
        from .figures import render_figures

        render_figures(report, out / "figures")
    print(text, end="")
    return 0


# ------------------------------------------------------------------- main

_COMMANDS = {
    "preprocess": cmd_preprocess,
    "tune": cmd_tune,
    "run": cmd_run,
    "cluster": cmd_cluster,
    "report": cmd_report,
}

# flag name -> (config field, kwargs)
_FLAG_SPECS = {
    "--input": dict(dest="input", help="raw documents (.csv with id,text header, else one per line)"),
    "--embeddings": dict(dest="embeddings", help="GloVe-format embedding file (.gz ok)"),
    "--extra-stopwords": dict(dest="extra_stopwords", help="file with one extra stopword per line"),
    "--min-count": dict(dest="min_count", type=int),
    "--max-doc-frac": dict(dest="max_doc_frac", type=float),
    "--k": dict(dest="k", type=int, help="number of topics and clusters"),
    "--n-runs": dict(dest="n_runs", type=int, help="replicated fits"),
    "--alpha": dict(dest="alpha", type=float),
    "--beta": dict(dest="beta", type=float),
    "--iterations": dict(dest="iterations", type=int, help="Gibbs sweeps per fit"),
    "--base-seed": dict(dest="base_seed", type=int),
    "--jobs": dict(dest="jobs", type=int, help="parallel fits"),
    "--holdout-frac": dict(dest="holdout_frac", type=float),
    "--tuning-iterations": dict(dest="tuning_iterations", type=int),
    "--foldin-iterations": dict(dest="foldin_iterations", type=int),
    "--de-population": dict(dest="de_population", type=int),
    "--de-cr": dict(dest="de_cr", type=float),
    "--de-f": dict(dest="de_f", type=float),
    "--de-generations": dict(dest="de_generations", type=int),
    "--de-bound-low": dict(dest="de_bound_low", type=float),
    "--de-bound-high": dict(dest="de_bound_high", type=float),
    "--metric": dict(dest="metric", choices=["cosine", "euclidean"]),
    "--depth": dict(dest="depth", type=int, help="top-word list depth"),
    "--rbo-p": dict(dest="rbo_p", type=float, help="rank-biased overlap persistence"),
    "--relevance-lambda": dict(dest="relevance_lambda", type=float,
                               help="re-rank top words by relevance (1.0 = raw phi order)"),
}

_COMMAND_FLAGS = {
    "preprocess": ["--input", "--min-count", "--max-doc-frac", "--extra-stopwords"],
    "tune": ["--k", "--base-seed", "--holdout-frac", "--tuning-iterations",
             "--foldin-iterations", "--de-population", "--de-cr", "--de-f",
             "--de-generations", "--de-bound-low", "--de-bound-high"],
    "run": ["--k", "--n-runs", "--alpha", "--beta", "--iterations",
            "--base-seed", "--jobs"],
    "cluster": ["--embeddings", "--k", "--metric", "--base-seed"],
    "report": ["--depth", "--rbo-p", "--relevance-lambda", "--k"],
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicstab",
        description="Replicated LDA with cluster-level stability reporting.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in _COMMANDS.items():
        p = sub.add_parser(name, help=func.__doc__)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--output-dir", dest="output_dir")
        p.add_argument("--verbose", action="store_true")
        if name == "run":
            p.add_argument("--tune", action=argparse.BooleanOptionalAction,
                           default=None, help="use tuned alpha/beta from the tune stage")
        if name == "report":
            p.add_argument("--details", action=argparse.BooleanOptionalAction, default=None)
            p.add_argument("--figures", action=argparse.BooleanOptionalAction, default=None)
        for flag in _COMMAND_FLAGS[name]:
            p.add_argument(flag, **_FLAG_SPECS[flag])
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    overrides = {
        k: v for k, v in vars(args).items()
        if k not in {"command", "config", "verbose"} and v is not None
    }
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = build_config(file_values, overrides)
        return _COMMANDS[args.command](cfg)
    except TopicStabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
