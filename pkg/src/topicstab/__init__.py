"""Replicated LDA topic modeling with cluster-level stability reporting.

Fit the same corpus many times with different seeds, pool every run's topics,
cluster them in a word-embedding space, and measure how well the runs agree
inside each cluster. Stable themes survive reseeding; artifacts of a single
random initialization do not.
"""

__version__ = "0.1.0"

from .clustering import Clustering, DistanceMatrix, k_medoids, pairwise_distances, silhouette_values
from .corpus import (
    Corpus,
    Document,
    Vocabulary,
    build_vocabulary,
    encode,
    split_holdout,
    tokenize,
)
from .embedding import EmbeddingMatrix, TopicPool, TopicVectors, load_embeddings, pool_topics, project
from .lda import LdaConfig, TopicModel, fit, perplexity, replicate
from .report import build_report, render_text_table, write_report_json
from .stability import (
    RboParams,
    cluster_stability,
    jaccard_top,
    rbo_ext,
    relevance_rerank,
    spearman_top,
    top_words_of_cluster,
    top_words_of_topic,
)
from .tuning import DeConfig, DeResult, TuningResult, differential_evolution, tune_hyperparams

__all__ = [
    "Clustering",
    "Corpus",
    "DeConfig",
    "DeResult",
    "DistanceMatrix",
    "Document",
    "EmbeddingMatrix",
    "LdaConfig",
    "RboParams",
    "TopicModel",
    "TopicPool",
    "TopicVectors",
    "TuningResult",
    "Vocabulary",
    "build_report",
    "build_vocabulary",
    "cluster_stability",
    "differential_evolution",
    "encode",
    "fit",
    "jaccard_top",
    "k_medoids",
    "load_embeddings",
    "pairwise_distances",
    "perplexity",
    "pool_topics",
    "project",
    "rbo_ext",
    "relevance_rerank",
    "render_text_table",
    "replicate",
    "silhouette_values",
    "spearman_top",
    "split_holdout",
    "tokenize",
    "top_words_of_cluster",
    "top_words_of_topic",
    "tune_hyperparams",
    "write_report_json",
]
