import numpy as np
import pytest

from topicstab.corpus import Corpus, Document, Vocabulary


@pytest.fixture
def small_vocab():
    words = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot"]
    return Vocabulary(words, [60, 50, 40, 30, 20, 10], [6, 5, 4, 3, 2, 1])


def make_corpus(token_lists, vocab_size: int = 6) -> Corpus:
    words = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot"][:vocab_size]
    vocab = Vocabulary(words, list(range(vocab_size * 10, 0, -10)),
                       [1] * vocab_size)
    docs = [Document(id=str(i), tokens=np.asarray(t, dtype=np.int32))
            for i, t in enumerate(token_lists)]
    return Corpus(documents=docs, vocabulary=vocab)


@pytest.fixture
def two_block_corpus():
    """Two crisp word blocks; enough signal for quick fits."""
    rng = np.random.default_rng(42)
    docs = []
    for i in range(40):
        block = i % 2
        base = 0 if block == 0 else 3
        docs.append(rng.integers(base, base + 3, size=30).astype(np.int32))
    return make_corpus(docs)
