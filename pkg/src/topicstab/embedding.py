"""Word-embedding lookup and topic projection.

Loads GloVe-style text embeddings (word then whitespace-separated floats,
one word per line, optionally gzip-compressed), aligns them to a vocabulary,
and projects stacked topic-word matrices into the embedding space.
"""

from __future__ import annotations

import gzip
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus import Vocabulary
from .errors import (
    DimensionMismatchError,
    EmptyEmbeddingError,
    InconsistentVocabularyError,
    MalformedLineError,
)

log = logging.getLogger(__name__)


@dataclass
class EmbeddingMatrix:
    """Vocabulary-aligned embedding rows; (w, v) with v the vector dimension."""

    vectors: np.ndarray
    dimension: int
    coverage: float  # fraction of vocabulary words found in the file


@dataclass
class TopicPool:
    """All topics from all runs stacked into one (t, w) matrix, t = n * k.

    ``provenance[i]`` is the (run_id, topic_index) pair behind row i.
    ``top_words_cache`` is filled lazily by the stability layer.
    """

    matrix: np.ndarray
    provenance: list
    top_words_cache: list | None = None


@dataclass
class TopicVectors:
    """Topic rows projected into embedding space; (t, v), provenance as in the pool."""

    vectors: np.ndarray
    provenance: list


def load_embeddings(path, vocabulary: Vocabulary) -> EmbeddingMatrix:
    """Read embeddings and align rows to vocabulary id order.

    The first data line fixes the dimension; later lines that disagree, fail
    to parse as floats, or carry non-finite values raise MalformedLineError
    with the line number. Vocabulary words missing from the file get zero
    vectors; when a word appears more than once the last occurrence wins.
    """
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    w = len(vocabulary)
    vectors = None
    dimension = None
    found = set()
    data_lines = 0
    with opener(path, "rt", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) < 2:
                raise MalformedLineError(
                    f"{path}:{line_no}: expected a word followed by values"
                )
            data_lines += 1
            word, raw = parts[0], parts[1:]
            if dimension is None:
                dimension = len(raw)
                vectors = np.zeros((w, dimension), dtype=np.float64)
            elif len(raw) != dimension:
                raise MalformedLineError(
                    f"{path}:{line_no}: expected {dimension} values, got {len(raw)}"
                )
            try:
                vec = np.asarray(raw, dtype=np.float64)
            except ValueError:
                raise MalformedLineError(
                    f"{path}:{line_no}: values are not all numeric"
                ) from None
            if not np.all(np.isfinite(vec)):
                raise MalformedLineError(f"{path}:{line_no}: non-finite value")
            if word not in vocabulary:
                continue
            vectors[vocabulary.id_of(word)] = vec
            found.add(word)
    if data_lines == 0:
        raise EmptyEmbeddingError(f"{path}: no embedding vectors found")
    coverage = len(found) / w
    if coverage < 1.0:
        log.warning("embeddings cover %d/%d vocabulary words (%.1f%%)",
                     len(found), w, 100.0 * coverage)
    return EmbeddingMatrix(vectors=vectors, dimension=dimension, coverage=coverage)


def pool_topics(models) -> TopicPool:
    """Stack every run's phi into one matrix, rows in (run, topic) order."""
    models = sorted(models, key=lambda m: m.run_id)
    if not models:
        raise ValueError("need at least one model to pool")
    k = models[0].phi.shape[0]
    w = models[0].phi.shape[1]
    for m in models:
        if m.phi.shape != (k, w):
            raise InconsistentVocabularyError(
                f"run {m.run_id} has phi shape {m.phi.shape}, expected {(k, w)}"
            )
    matrix = np.vstack([m.phi for m in models])
    provenance = [(m.run_id, t) for m in models for t in range(k)]
    return TopicPool(matrix=matrix, provenance=provenance)


def project(pool: TopicPool, embedding: EmbeddingMatrix) -> TopicVectors:
    """Topic rows times embedding rows: (t, w) @ (w, v) -> (t, v)."""
    if pool.matrix.shape[1] != embedding.vectors.shape[0]:
        raise DimensionMismatchError(
            f"pool width {pool.matrix.shape[1]} does not match "
            f"embedding rows {embedding.vectors.shape[0]}"
        )
    return TopicVectors(vectors=pool.matrix @ embedding.vectors,
                        provenance=list(pool.provenance))


def with_weights(pool: TopicPool, matrix: np.ndarray) -> TopicPool:
    """Same pool, different row weights (used for relevance re-weighting)."""
    if matrix.shape != pool.matrix.shape:
        raise ValueError("replacement matrix must match the pool shape")
    return replace(pool, matrix=matrix, top_words_cache=None)
