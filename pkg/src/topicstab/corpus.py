"""Corpus ingestion: tokenization, vocabulary construction, encoding, splits.

The vocabulary owns the integer id space used everywhere downstream: ids are
assigned in descending term-frequency order (ties broken lexicographically),
and documents are stored as arrays of those ids.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    EmptyCorpusError,
    EmptyVocabularyError,
    TooFewDocumentsError,
)

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

# Standard english stopword list (snowball-derived). Filtering happens after
# lowercasing, so the list only needs lowercase forms.
DEFAULT_STOPWORDS = frozenset("""
a about above after again against all am an and any are aren as at be because
been before being below between both but by can cannot could couldn did didn
do does doesn doing don down during each few for from further had hadn has
hasn have haven having he her here hers herself him himself his how i if in
into is isn it its itself just ll me mightn more most mustn my myself needn no
nor not now o of off on once only or other our ours ourselves out over own re
s same shan she should shouldn so some such t than that the their theirs them
themselves then there these they this those through to too under until up ve
very was wasn we were weren what when where which while who whom why will with
won would wouldn y you your yours yourself yourselves
""".split())


def tokenize(text: str) -> list[str]:
    """Lowercase and split into unicode word tokens.

    Tokens are maximal runs of word characters excluding underscore, so
    hyphens, punctuation and underscores all act as separators. Purely
    numeric tokens are dropped.
    """
    return [t for t in _TOKEN_RE.findall(text.lower()) if not t.isdigit()]


class Vocabulary:
    """Immutable word <-> id mapping with per-word corpus counts.

    Word order (and thus id order) is descending term count with
    lexicographic tie-breaking, fixed at construction time.
    """

    __slots__ = ("words", "term_count", "doc_count", "_word_to_id", "_words_arr")

    def __init__(self, words, term_count, doc_count):
        self.words: tuple[str, ...] = tuple(words)
        self.term_count = np.asarray(term_count, dtype=np.int64)
        self.doc_count = np.asarray(doc_count, dtype=np.int64)
        if not (len(self.words) == self.term_count.size == self.doc_count.size):
            raise ValueError("words and count arrays must have equal length")
        if len(self.words) == 0:
            raise EmptyVocabularyError("vocabulary has no words")
        self._word_to_id = {w: i for i, w in enumerate(self.words)}
        if len(self._word_to_id) != len(self.words):
            raise ValueError("duplicate words in vocabulary")
        self._words_arr = None

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self._word_to_id

    def id_of(self, word: str) -> int:
        return self._word_to_id[word]

    def word_of(self, word_id: int) -> str:
        return self.words[word_id]

    @property
    def words_array(self) -> np.ndarray:
        """Words as a numpy unicode array (cached; used for tie-break sorts)."""
        if self._words_arr is None:
            self._words_arr = np.array(self.words)
        return self._words_arr

    def word_marginals(self) -> np.ndarray:
        """Empirical word distribution p_w = term_count / total tokens."""
        total = self.term_count.sum()
        return self.term_count / float(total)

    def save_tsv(self, path) -> None:
        """One word per line: word, term count, document count, tab-separated."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for i, w in enumerate(self.words):
                fh.write(f"{w}\t{self.term_count[i]}\t{self.doc_count[i]}\n")

    @classmethod
    def load_tsv(cls, path) -> "Vocabulary":
        words, tc, dc = [], [], []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{path}:{line_no}: expected 3 tab-separated fields")
                words.append(parts[0])
                tc.append(int(parts[1]))
                dc.append(int(parts[2]))
        return cls(words, tc, dc)


@dataclass
class Document:
    """A document as an array of vocabulary ids (out-of-vocabulary terms removed)."""

    id: str
    tokens: np.ndarray

    def __len__(self) -> int:
        return int(self.tokens.size)


@dataclass
class Corpus:
    documents: list[Document]
    vocabulary: Vocabulary

    @property
    def num_documents(self) -> int:
        return len(self.documents)

    @property
    def total_tokens(self) -> int:
        return sum(len(d) for d in self.documents)

    @property
    def num_empty_documents(self) -> int:
        return sum(1 for d in self.documents if len(d) == 0)

    def save_json(self, path) -> None:
        payload = {
            "version": 1,
            "documents": [
                {"id": d.id, "tokens": d.tokens.tolist()} for d in self.documents
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load_json(cls, path, vocabulary: Vocabulary) -> "Corpus":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        w = len(vocabulary)
        docs = []
        for rec in payload["documents"]:
            toks = np.asarray(rec["tokens"], dtype=np.int32)
            if toks.size and (toks.min() < 0 or toks.max() >= w):
                raise ValueError(
                    f"document {rec['id']!r} has token ids outside the vocabulary"
                )
            docs.append(Document(id=str(rec["id"]), tokens=toks))
        return cls(documents=docs, vocabulary=vocabulary)


def build_vocabulary(
    token_docs,
    min_count: int = 10,
    max_doc_frac: float = 0.30,
    stopwords=DEFAULT_STOPWORDS,
) -> Vocabulary:
    """Build the retained vocabulary from tokenized documents.

    A word is kept iff its total count is at least ``min_count``, it appears
    in strictly fewer than ``max_doc_frac`` of the documents, and it is not a
    stopword. ``max_doc_frac >= 1.0`` disables the document-frequency filter
    (a word present in every document is otherwise always excluded by the
    strict inequality).
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    if not (0.0 < max_doc_frac <= 1.0):
        raise ValueError("max_doc_frac must be in (0, 1]")
    token_docs = list(token_docs)
    m = len(token_docs)
    if m == 0:
        raise EmptyCorpusError("no documents to build a vocabulary from")

    term_count: Counter = Counter()
    doc_count: Counter = Counter()
    for doc in token_docs:
        term_count.update(doc)
        doc_count.update(set(doc))

    kept = []
    for word, tc in term_count.items():
        if tc < min_count:
            continue
        if max_doc_frac < 1.0 and doc_count[word] / m >= max_doc_frac:
            continue
        if word in stopwords:
            continue
        kept.append(word)
    if not kept:
        raise EmptyVocabularyError(
            f"no words survive filtering (min_count={min_count}, "
            f"max_doc_frac={max_doc_frac}) over {m} documents"
        )
    kept.sort(key=lambda w: (-term_count[w], w))
    return Vocabulary(
        kept,
        [term_count[w] for w in kept],
        [doc_count[w] for w in kept],
    )


def encode(token_docs, vocabulary: Vocabulary, ids=None) -> Corpus:
    """Map tokenized documents into the vocabulary id space.

    Out-of-vocabulary tokens are dropped. Documents that become empty are
    kept (their ids stay aligned with the input) and counted in a warning.
    """
    token_docs = list(token_docs)
    if ids is None:
        ids = [str(i) for i in range(len(token_docs))]
    ids = [str(x) for x in ids]
    if len(ids) != len(token_docs):
        raise ValueError("ids and documents must have equal length")
    lookup = vocabulary._word_to_id
    docs = []
    empty = 0
    for doc_id, tokens in zip(ids, token_docs):
        enc = np.asarray(
            [lookup[t] for t in tokens if t in lookup], dtype=np.int32
        )
        if enc.size == 0:
            empty += 1
        docs.append(Document(id=doc_id, tokens=enc))
    if empty:
        log.warning("%d of %d documents are empty after encoding", empty, len(docs))
    return Corpus(documents=docs, vocabulary=vocabulary)


def split_holdout(corpus: Corpus, holdout_frac: float, seed: int):
    """Random train/holdout split at the document level.

    Returns ``(train, holdout)`` corpora sharing the input vocabulary.
    Both sides keep their documents in original corpus order, and the split
    is a deterministic function of the seed.
    """
    if not (0.0 < holdout_frac < 1.0):
        raise ValueError("holdout_frac must be in (0, 1)")
    m = corpus.num_documents
    if m < 2:
        raise TooFewDocumentsError(
            f"need at least 2 documents to split, got {m}"
        )
    n_hold = int(round(m * holdout_frac))
    n_hold = min(max(n_hold, 1), m - 1)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m)
    hold_idx = np.sort(perm[:n_hold])
    train_idx = np.sort(perm[n_hold:])
    train = Corpus([corpus.documents[i] for i in train_idx], corpus.vocabulary)
    hold = Corpus([corpus.documents[i] for i in hold_idx], corpus.vocabulary)
    return train, hold


def read_documents(path) -> tuple[list[str], list[str]]:
    """Read raw documents from disk.

    ``.csv`` files must have a header row and two columns (id, text); any
    other extension is treated as plain text with one document per line,
    ids assigned by line position. Returns ``(ids, texts)``.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        ids, texts = [], []
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or len(header) < 2:
                raise ValueError(f"{path}: expected a header row with (id, text) columns")
            for row_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) < 2:
                    raise ValueError(f"{path}:{row_no}: expected 2 columns (id, text)")
                ids.append(row[0])
                texts.append(row[1])
        return ids, texts
    with open(path, encoding="utf-8") as fh:
        texts = [line.rstrip("\n") for line in fh]
    # trailing newline at EOF produces a phantom empty last line; drop it
    if texts and texts[-1] == "":
        texts.pop()
    return [str(i) for i in range(len(texts))], texts


def load_stopwords(path) -> frozenset[str]:
    """Extra stopwords, one per line; merged with the built-in list by callers."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())
