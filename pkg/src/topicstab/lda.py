"""Collapsed Gibbs sampling for LDA, replicated fits, held-out perplexity.

The per-token sampling loop is JIT-compiled with numba; all randomness is
drawn outside the kernel from a numpy PCG64 generator, so a fit is a pure
function of (corpus, config) down to the bit level. Sampling uses inverse-CDF
lookup on the unnormalized conditional

    p(z = t) ∝ (n_tw + beta) / (n_t + W beta) * (n_dt + alpha)

where counts exclude the token being resampled.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from numba import njit

from .corpus import Corpus
from .errors import EmptyCorpusError, EmptyHoldoutError

log = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1

# Offset mixed into the model seed when perplexity() derives its fold-in RNG,
# so fold-in draws never replay the training stream.
_FOLDIN_SEED_TAG = 0x9E3779B9


@dataclass(frozen=True)
class LdaConfig:
    k: int
    alpha: float
    beta: float
    iterations: int
    seed: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass
class TopicModel:
    """A single fitted model: phi is (k, w), theta is (m, k)."""

    phi: np.ndarray
    theta: np.ndarray
    config: LdaConfig
    run_id: int = 0
    # (sweep, training perplexity) pairs, populated when fit() is asked to track
    train_perplexity: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.phi.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.phi.shape[1]


@njit(cache=True, nogil=True)
def _gibbs_sweep(doc_ids, word_ids, z, n_dk, n_kw, n_k, alpha, beta, uniforms):
    k = n_kw.shape[0]
    wbeta = n_kw.shape[1] * beta
    weights = np.empty(k, dtype=np.float64)
    for i in range(doc_ids.shape[0]):
        d = doc_ids[i]
        v = word_ids[i]
        old = z[i]
        n_dk[d, old] -= 1
        n_kw[old, v] -= 1
        n_k[old] -= 1
        total = 0.0
        for t in range(k):
            wgt = (n_kw[t, v] + beta) / (n_k[t] + wbeta) * (n_dk[d, t] + alpha)
            weights[t] = wgt
            total += wgt
        u = uniforms[i] * total
        acc = 0.0
        new = k - 1
        for t in range(k):
            acc += weights[t]
            if u < acc:
                new = t
                break
        z[i] = new
        n_dk[d, new] += 1
        n_kw[new, v] += 1
        n_k[new] += 1


@njit(cache=True, nogil=True)
def _foldin_sweep(doc_ids, word_ids, z, n_dk, phi, alpha, uniforms):
    # like _gibbs_sweep but phi is frozen; only document counts move
    k = phi.shape[0]
    weights = np.empty(k, dtype=np.float64)
    for i in range(doc_ids.shape[0]):
        d = doc_ids[i]
        v = word_ids[i]
        old = z[i]
        n_dk[d, old] -= 1
        total = 0.0
        for t in range(k):
            wgt = phi[t, v] * (n_dk[d, t] + alpha)
            weights[t] = wgt
            total += wgt
        u = uniforms[i] * total
        acc = 0.0
        new = k - 1
        for t in range(k):
            acc += weights[t]
            if u < acc:
                new = t
                break
        z[i] = new
        n_dk[d, new] += 1


def _flatten(corpus: Corpus):
    """Token stream as (doc_ids, word_ids) int32 arrays, document order."""
    lengths = np.array([len(d) for d in corpus.documents], dtype=np.int64)
    n = int(lengths.sum())
    doc_ids = np.repeat(np.arange(len(lengths), dtype=np.int32), lengths)
    word_ids = np.empty(n, dtype=np.int32)
    pos = 0
    for d in corpus.documents:
        word_ids[pos : pos + len(d)] = d.tokens
        pos += len(d)
    return doc_ids, word_ids, lengths


def _point_estimates(n_dk, n_kw, n_k, lengths, alpha, beta):
    k, w = n_kw.shape
    phi = (n_kw + beta) / (n_k[:, None] + w * beta)
    theta = (n_dk + alpha) / (lengths[:, None] + k * alpha)
    return phi, theta


def _stream_perplexity(phi, theta, doc_ids, word_ids) -> float:
    # token log-likelihood under the mixture: log sum_t theta_dt phi_tv
    p = np.einsum("ij,ij->i", theta[doc_ids], phi[:, word_ids].T)
    return float(np.exp(-np.log(p).sum() / doc_ids.shape[0]))


def fit(corpus: Corpus, config: LdaConfig, eval_every: int = 0) -> TopicModel:
    """Run collapsed Gibbs sampling and return point estimates.

    phi and theta are computed from the final sweep's counts (no averaging
    across sweeps). With ``eval_every > 0``, training-set perplexity is
    recorded after every that-many sweeps into ``model.train_perplexity``.

    Deterministic: the same corpus and config produce bit-identical results.
    """
    if corpus.num_documents == 0 or corpus.total_tokens == 0:
        raise EmptyCorpusError("cannot fit a model on a corpus with no tokens")
    w = len(corpus.vocabulary)
    k = config.k
    doc_ids, word_ids, lengths = _flatten(corpus)
    n = doc_ids.shape[0]
    m = lengths.shape[0]

    rng = np.random.default_rng(config.seed)
    z = rng.integers(0, k, size=n, dtype=np.int32)
    n_dk = np.zeros((m, k), dtype=np.int64)
    n_kw = np.zeros((k, w), dtype=np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)
    np.add.at(n_kw, (z, word_ids), 1)
    n_k = n_kw.sum(axis=1)

    history = []
    for sweep in range(1, config.iterations + 1):
        uniforms = rng.random(n)
        _gibbs_sweep(
            doc_ids, word_ids, z, n_dk, n_kw, n_k,
            float(config.alpha), float(config.beta), uniforms,
        )
        if eval_every and sweep % eval_every == 0:
            phi, theta = _point_estimates(
                n_dk, n_kw, n_k, lengths, config.alpha, config.beta
            )
            history.append((sweep, _stream_perplexity(phi, theta, doc_ids, word_ids)))

    phi, theta = _point_estimates(n_dk, n_kw, n_k, lengths, config.alpha, config.beta)
    return TopicModel(phi=phi, theta=theta, config=config, train_perplexity=history)


def replicate(
    corpus: Corpus,
    config: LdaConfig,
    n_runs: int,
    base_seed: int,
    jobs: int = 1,
    eval_every: int = 0,
) -> list[TopicModel]:
    """n independent fits; run i uses seed base_seed + i and run_id i.

    The returned list is ordered by run index regardless of ``jobs``; the
    kernels release the GIL, so thread-level parallelism is effective.
    """
    if n_runs < 2:
        raise ValueError("n_runs must be >= 2 for a replicated analysis")

    def one(i: int) -> TopicModel:
        cfg = replace(config, seed=base_seed + i)
        model = fit(corpus, cfg, eval_every=eval_every)
        model.run_id = i
        log.info("run %d/%d finished (seed %d)", i + 1, n_runs, cfg.seed)
        return model

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, range(n_runs)))
    return [one(i) for i in range(n_runs)]


def perplexity(
    model: TopicModel,
    holdout: Corpus,
    foldin_iterations: int = 50,
    seed: int | None = None,
) -> float:
    """Held-out perplexity by document completion.

    phi stays frozen; per-document topic proportions are estimated with
    ``foldin_iterations`` Gibbs sweeps over the held-out tokens, then

        perplexity = exp(-(1/N) sum_tokens log sum_t theta_dt phi_tv).

    The fold-in RNG defaults to a seed derived from the model's own seed, so
    repeated calls are reproducible without extra arguments.
    """
    if holdout.total_tokens == 0:
        raise EmptyHoldoutError("holdout set contains no tokens")
    if len(holdout.vocabulary) != model.vocab_size:
        raise ValueError(
            f"holdout vocabulary size {len(holdout.vocabulary)} does not match "
            f"model vocabulary size {model.vocab_size}"
        )
    if foldin_iterations < 1:
        raise ValueError("foldin_iterations must be >= 1")

    doc_ids, word_ids, lengths = _flatten(holdout)
    n = doc_ids.shape[0]
    m = lengths.shape[0]
    k = model.k
    if seed is None:
        seed = (model.config.seed + _FOLDIN_SEED_TAG) % (2**63)
    rng = np.random.default_rng(seed)

    z = rng.integers(0, k, size=n, dtype=np.int32)
    n_dk = np.zeros((m, k), dtype=np.int64)
    np.add.at(n_dk, (doc_ids, z), 1)
    phi = np.ascontiguousarray(model.phi)
    alpha = float(model.config.alpha)
    for _ in range(foldin_iterations):
        uniforms = rng.random(n)
        _foldin_sweep(doc_ids, word_ids, z, n_dk, phi, alpha, uniforms)

    theta = (n_dk + alpha) / (lengths[:, None] + k * alpha)
    return _stream_perplexity(phi, theta, doc_ids, word_ids)


def save_model(model: TopicModel, path, extra_meta: dict | None = None) -> None:
    """Write a model container: versioned JSON header plus float64 arrays."""
    meta = {
        "version": MODEL_FORMAT_VERSION,
        "run_id": model.run_id,
        "config": asdict(model.config),
    }
    if extra_meta:
        meta.update(extra_meta)
    history = np.asarray(model.train_perplexity, dtype=np.float64)
    if history.size == 0:
        history = history.reshape(0, 2)
    np.savez_compressed(
        path,
        meta=np.array(json.dumps(meta, sort_keys=True)),
        phi=np.ascontiguousarray(model.phi, dtype=np.float64),
        theta=np.ascontiguousarray(model.theta, dtype=np.float64),
        train_perplexity=history,
    )


def load_model(path) -> tuple[TopicModel, dict]:
    """Read a model container; returns (model, full meta dict)."""
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(data["meta"].item())
        if meta.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(
                f"{path}: unsupported model format version {meta.get('version')!r}"
            )
        cfg = LdaConfig(**meta["config"])
        model = TopicModel(
            phi=data["phi"],
            theta=data["theta"],
            config=cfg,
            run_id=int(meta["run_id"]),
            train_perplexity=[(int(s), float(p)) for s, p in data["train_perplexity"]],
        )
    return model, meta
