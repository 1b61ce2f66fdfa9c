"""Agreement metrics between ranked top-word lists, aggregated per cluster.

Three pairwise metrics compare two depth-d word rankings:

* rank-biased overlap, extrapolated variant (top-weighted, handles disjoint
  lists gracefully);
* Spearman correlation over the union of the two lists, absent words sharing
  a tied average rank;
* Jaccard similarity of the two word sets.

Per-cluster scores average each metric over all unordered pairs of member
topics; the per-point silhouettes from clustering complete the picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .clustering import Clustering
from .corpus import Vocabulary
from .embedding import TopicPool
from .errors import DepthMismatchError, ZeroMarginalError

DEFAULT_DEPTH = 10
DEFAULT_PERSISTENCE = 0.9
DEFAULT_RELEVANCE_LAMBDA = 0.6


@dataclass(frozen=True)
class RboParams:
    """Persistence p weights how fast attention decays down the ranking."""

    p: float = DEFAULT_PERSISTENCE
    d: int = DEFAULT_DEPTH

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ValueError("persistence p must be in (0, 1)")
        if self.d < 1:
            raise ValueError("depth d must be >= 1")


def _check_depth(t1, t2, d: int):
    t1, t2 = list(t1), list(t2)
    if len(t1) != d or len(t2) != d:
        raise DepthMismatchError(
            f"expected two rankings of depth {d}, got {len(t1)} and {len(t2)}"
        )
    if len(set(t1)) != d or len(set(t2)) != d:
        raise ValueError("rankings must not contain duplicate words")
    return t1, t2


def rbo_ext(t1, t2, params: RboParams = RboParams()) -> float:
    """Extrapolated rank-biased overlap of two equal-depth rankings.

    With X_i the overlap of the depth-i prefixes,

        RBO = X_d / d * p^d + (1 - p) / p * sum_{i=1}^{d} X_i / i * p^i.

    1.0 for identical rankings, 0.0 for disjoint ones.
    """
    t1, t2 = _check_depth(t1, t2, params.d)
    p, d = params.p, params.d
    seen1: set = set()
    seen2: set = set()
    overlap = 0
    tail = 0.0
    for i in range(1, d + 1):
        w1, w2 = t1[i - 1], t2[i - 1]
        if w1 == w2:
            overlap += 1
        else:
            if w1 in seen2:
                overlap += 1
            if w2 in seen1:
                overlap += 1
            seen1.add(w1)
            seen2.add(w2)
        tail += overlap / i * p**i
    return overlap / d * p**d + (1.0 - p) / p * tail


def spearman_top(t1, t2, d: int = DEFAULT_DEPTH) -> float:
    """Spearman correlation of two depth-d rankings over their union.

    Words present in a list take their rank 1..d; words absent from it share
    the tied average rank (d + 1 + u) / 2 with u the union size. Identical
    rankings give exactly 1.0 and reversed rankings exactly -1.0.
    """
    t1, t2 = _check_depth(t1, t2, d)
    union = sorted(set(t1) | set(t2))
    u = len(union)
    tied = (d + 1 + u) / 2.0
    r1 = {w: i + 1.0 for i, w in enumerate(t1)}
    r2 = {w: i + 1.0 for i, w in enumerate(t2)}
    x = np.array([r1.get(w, tied) for w in union])
    y = np.array([r2.get(w, tied) for w in union])
    xc = x - x.mean()
    yc = y - y.mean()
    vx = float(xc @ xc)
    vy = float(yc @ yc)
    if vx == 0.0 or vy == 0.0:
        # only possible at depth 1; constant rank vectors carry no order
        return 1.0 if np.array_equal(x, y) else 0.0
    return float((xc @ yc) / math.sqrt(vx * vy))


def jaccard_top(t1, t2, d: int = DEFAULT_DEPTH) -> float:
    """Jaccard similarity of the two depth-d word sets."""
    t1, t2 = _check_depth(t1, t2, d)
    s1, s2 = set(t1), set(t2)
    return len(s1 & s2) / len(s1 | s2)


def top_words_of_topic(weights, vocabulary: Vocabulary, d: int = DEFAULT_DEPTH):
    """The d highest-weighted words; weight ties break lexicographically."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 1 or weights.size != len(vocabulary):
        raise ValueError("weights must be one row over the full vocabulary")
    if d < 1 or d > weights.size:
        raise ValueError(f"depth must be in [1, {weights.size}], got {d}")
    order = np.lexsort((vocabulary.words_array, -weights))
    return [vocabulary.words[i] for i in order[:d]]


def top_words_of_cluster(pool: TopicPool, members, vocabulary: Vocabulary,
                         d: int = DEFAULT_DEPTH):
    """Ranking of the summed member rows: the cluster's consensus topic."""
    members = np.asarray(members, dtype=np.int64)
    if members.size == 0:
        raise ValueError("cluster has no members")
    return top_words_of_topic(pool.matrix[members].sum(axis=0), vocabulary, d)


def attach_top_words(pool: TopicPool, vocabulary: Vocabulary,
                     d: int = DEFAULT_DEPTH) -> TopicPool:
    """Fill pool.top_words_cache with the per-row rankings (idempotent)."""
    cache = pool.top_words_cache
    if cache is None or (cache and len(cache[0]) != d):
        pool.top_words_cache = [
            top_words_of_topic(pool.matrix[i], vocabulary, d)
            for i in range(pool.matrix.shape[0])
        ]
    return pool


def relevance_rerank(phi_row, word_marginals, lam: float = DEFAULT_RELEVANCE_LAMBDA):
    """Relevance scores lam*log(phi_w) + (1-lam)*log(phi_w / p_w).

    At lam = 1 the ordering equals the raw probability ordering; lower lam
    promotes words that are unusually probable under this topic relative to
    the corpus marginal p_w. Requires strictly positive phi (guaranteed by
    beta smoothing) and marginals.
    """
    if not (0.0 <= lam <= 1.0):
        raise ValueError("lambda must be in [0, 1]")
    phi_row = np.asarray(phi_row, dtype=np.float64)
    p = np.asarray(word_marginals, dtype=np.float64)
    if phi_row.shape != p.shape:
        raise ValueError("phi row and marginals must have equal length")
    if np.any(p <= 0.0):
        raise ZeroMarginalError("word marginals must be strictly positive")
    if np.any(phi_row <= 0.0):
        raise ValueError("phi must be strictly positive (smoothed)")
    logphi = np.log(phi_row)
    return lam * logphi + (1.0 - lam) * (logphi - np.log(p))


def relevance_matrix(matrix, word_marginals, lam: float = DEFAULT_RELEVANCE_LAMBDA):
    """Row-wise relevance_rerank over a stacked (t, w) matrix."""
    if not (0.0 <= lam <= 1.0):
        raise ValueError("lambda must be in [0, 1]")
    matrix = np.asarray(matrix, dtype=np.float64)
    p = np.asarray(word_marginals, dtype=np.float64)
    if matrix.shape[1] != p.size:
        raise ValueError("marginals must match the matrix width")
    if np.any(p <= 0.0):
        raise ZeroMarginalError("word marginals must be strictly positive")
    if np.any(matrix <= 0.0):
        raise ValueError("phi must be strictly positive (smoothed)")
    logphi = np.log(matrix)
    return lam * logphi + (1.0 - lam) * (logphi - np.log(p)[None, :])


@dataclass
class PairScore:
    row_a: int
    row_b: int
    rbo: float
    spearman: float
    jaccard: float


@dataclass
class ClusterStability:
    cluster_id: int
    members: list            # pool row indices, ascending
    top_words: list          # consensus ranking of the summed member rows
    mean_silhouette: float
    # pairwise means are None for singleton clusters (no pairs to average)
    mean_rbo: float | None
    mean_spearman: float | None
    mean_jaccard: float | None
    pair_scores: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.members)


def cluster_stability(
    pool: TopicPool,
    clustering: Clustering,
    vocabulary: Vocabulary,
    rbo_params: RboParams = RboParams(),
) -> list[ClusterStability]:
    """Score every cluster: pairwise metric means plus mean silhouette.

    Results come back ordered by cluster id; sorting for presentation is the
    report layer's concern.
    """
    d = rbo_params.d
    attach_top_words(pool, vocabulary, d)
    tops = pool.top_words_cache
    out = []
    for cid in range(clustering.k):
        members = clustering.members(cid).tolist()
        pairs = []
        for a, b in combinations(members, 2):
            pairs.append(PairScore(
                row_a=a,
                row_b=b,
                rbo=rbo_ext(tops[a], tops[b], rbo_params),
                spearman=spearman_top(tops[a], tops[b], d),
                jaccard=jaccard_top(tops[a], tops[b], d),
            ))
        if pairs:
            mean_rbo = sum(p.rbo for p in pairs) / len(pairs)
            mean_spear = sum(p.spearman for p in pairs) / len(pairs)
            mean_jac = sum(p.jaccard for p in pairs) / len(pairs)
        else:
            mean_rbo = mean_spear = mean_jac = None
        out.append(ClusterStability(
            cluster_id=cid,
            members=members,
            top_words=top_words_of_cluster(pool, members, vocabulary, d),
            mean_silhouette=float(clustering.silhouette[members].mean()),
            mean_rbo=mean_rbo,
            mean_spearman=mean_spear,
            mean_jaccard=mean_jac,
            pair_scores=pairs,
        ))
    return out


def pearson(x, y) -> float:
    """Plain Pearson correlation; used for cross-metric agreement summaries."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise ValueError("need two equal-length samples with at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    vx = float(xc @ xc)
    vy = float(yc @ yc)
    if vx == 0.0 or vy == 0.0:
        raise ValueError("correlation undefined for a constant sample")
    return float((xc @ yc) / math.sqrt(vx * vy))
