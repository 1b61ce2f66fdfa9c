"""Pipeline configuration: defaults, flat key=value files, flag overrides.

Precedence is command-line flag > config file > built-in default. The file
format is one ``key = value`` pair per line; blank lines and ``#`` comments
are ignored.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError


@dataclass
class PipelineConfig:
    # io
    input: str | None = None
    embeddings: str | None = None
    output_dir: str = "topicstab_out"
    extra_stopwords: str | None = None
    # vocabulary
    min_count: int = 10
    max_doc_frac: float = 0.30
    # model
    k: int = 20
    n_runs: int = 20
    alpha: float = 0.167
    beta: float = 0.076
    iterations: int = 1000
    base_seed: int = 0
    jobs: int = 1
    # tuning
    tune: bool = False
    holdout_frac: float = 0.1
    tuning_iterations: int = 200
    foldin_iterations: int = 50
    de_population: int = 20
    de_cr: float = 0.5
    de_f: float = 0.8
    de_generations: int = 10
    de_bound_low: float = 0.005
    de_bound_high: float = 2.0
    # clustering / stability
    metric: str = "cosine"
    depth: int = 10
    rbo_p: float = 0.9
    relevance_lambda: float | None = None
    # report
    figures: bool = True
    details: bool = False


_FIELDS = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def parse_config_file(path) -> dict:
    """Read a flat key=value file into a raw string dict."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            if key not in _FIELDS:
                raise ConfigError(
                    f"{path}:{line_no}: unknown key {key!r} "
                    f"(known keys: {', '.join(sorted(_FIELDS))})"
                )
            values[key] = raw.strip()
    return values


def _coerce(key: str, raw):
    if not isinstance(raw, str):
        return raw
    kind = _FIELDS[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "float | None":
            return None if raw.lower() in {"", "none"} else float(raw)
        return raw  # str and str | None stay as-is
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from None


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Merge defaults, config-file values, and CLI overrides (highest wins)."""
    merged = {}
    for source in (file_values or {}), (overrides or {}):
        for key, raw in source.items():
            if raw is None:
                continue
            if key not in _FIELDS:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = _coerce(key, raw)
    cfg = PipelineConfig(**merged)
    validate_config(cfg)
    return cfg


def validate_config(cfg: PipelineConfig) -> None:
    def fail(msg):
        raise ConfigError(msg)

    if cfg.k < 2:
        fail(f"k must be >= 2, got {cfg.k}")
    if cfg.n_runs < 2:
        fail(f"n_runs must be >= 2, got {cfg.n_runs}")
    if cfg.alpha <= 0 or cfg.beta <= 0:
        fail("alpha and beta must be positive")
    if cfg.iterations < 1:
        fail("iterations must be >= 1")
    if cfg.min_count < 1:
        fail("min_count must be >= 1")
    if not (0.0 < cfg.max_doc_frac <= 1.0):
        fail(f"max_doc_frac must be in (0, 1], got {cfg.max_doc_frac}")
    if not (0.0 < cfg.holdout_frac < 1.0):
        fail(f"holdout_frac must be in (0, 1), got {cfg.holdout_frac}")
    if cfg.tuning_iterations < 1 or cfg.foldin_iterations < 1:
        fail("tuning_iterations and foldin_iterations must be >= 1")
    if cfg.de_population < 4:
        fail("de_population must be >= 4")
    if not (0.0 <= cfg.de_cr <= 1.0):
        fail("de_cr must be in [0, 1]")
    if not (0.0 < cfg.de_f <= 2.0):
        fail("de_f must be in (0, 2]")
    if cfg.de_generations < 1:
        fail("de_generations must be >= 1")
    if cfg.de_bound_low >= cfg.de_bound_high or cfg.de_bound_low <= 0:
        fail("de bounds must satisfy 0 < low < high")
    if cfg.metric not in ("cosine", "euclidean"):
        fail(f"metric must be 'cosine' or 'euclidean', got {cfg.metric!r}")
    if cfg.depth < 1:
        fail("depth must be >= 1")
    if not (0.0 < cfg.rbo_p < 1.0):
        fail(f"rbo_p must be in (0, 1), got {cfg.rbo_p}")
    if cfg.relevance_lambda is not None and not (0.0 <= cfg.relevance_lambda <= 1.0):
        fail("relevance_lambda must be in [0, 1]")
    if cfg.jobs < 1:
        fail("jobs must be >= 1")


def config_summary(cfg: PipelineConfig) -> dict:
    """The config as a plain dict for embedding into reports."""
    return dataclasses.asdict(cfg)
