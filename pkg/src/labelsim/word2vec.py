"""Skip-gram word vectors trained with negative sampling.

A compact SGD trainer sufficient for corpus-scale baselines: input
vectors start uniform in ``[-0.5/dim, 0.5/dim]``, the output layer starts
at zero, the step size decays linearly from its initial value to zero
over all epochs, and negatives are drawn from the unigram distribution
raised to 3/4.

In deterministic mode (single worker, fixed seed) training is bitwise
reproducible. With ``workers > 1`` document chunks are trained on
concurrent threads with unsynchronized updates to the shared weights;
results are then nondeterministic by design.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import Corpus, Document, tokenize
from .errors import DegenerateDataError
from .vectors import EmbeddingMatrix

__all__ = ["Word2VecConfig", "WordEmbeddingTable", "train_word2vec", "doc_vector_avg_words", "SkipGramVectorizer"]

_NOISE_EXPONENT = 0.75


@dataclass(frozen=True)
class Word2VecConfig:
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 10
    min_count: int = 1
    learning_rate: float = 0.025
    seed: int = 0
    deterministic: bool = True
    workers: int = 1

    def __post_init__(self) -> None:
        if self.dim < 1 or self.window < 1 or self.epochs < 1 or self.negatives < 0:
            raise ValueError("dim, window, epochs must be >= 1 and negatives >= 0")


@dataclass
class WordEmbeddingTable:
    """Trained word vectors: one vector per vocabulary term."""

    vectors: EmbeddingMatrix
    config: Word2VecConfig
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def vocabulary(self) -> dict[str, int]:
        return self.vectors._index

    def __contains__(self, term: str) -> bool:
        return term in self.vectors

    def vector(self, term: str) -> np.ndarray:
        return self.vectors.vector(term)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def _corpus_tokens(corpus: Corpus | Iterable) -> list[list[str]]:
    if isinstance(corpus, Corpus):
        return [tokenize(d.text) for d in corpus]
    return [tokenize(item) if isinstance(item, str) else list(item) for item in corpus]


def train_word2vec(corpus: Corpus | Iterable, cfg: Word2VecConfig = Word2VecConfig()) -> WordEmbeddingTable:
    """Train skip-gram vectors with negative sampling over a corpus.

    Accepts a :class:`Corpus`, an iterable of texts, or pre-tokenized
    token lists. Raises :class:`DegenerateDataError` when nothing survives
    the vocabulary cut.
    """
    token_lists = _corpus_tokens(corpus)
    counts: dict[str, int] = {}
    for tokens in token_lists:
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
    vocab = sorted(t for t, c in counts.items() if c >= cfg.min_count)
    if not vocab:
        raise DegenerateDataError("empty vocabulary after min_count filtering")
    index = {t: i for i, t in enumerate(vocab)}

    sentences = [
        np.asarray([index[t] for t in tokens if t in index], dtype=np.int64)
        for tokens in token_lists
    ]
    sentences = [s for s in sentences if s.size > 0]
    total_words = sum(s.size for s in sentences) * cfg.epochs
    if total_words == 0:
        raise DegenerateDataError("no trainable tokens")

    freq = np.asarray([counts[t] for t in vocab], dtype=np.float64) ** _NOISE_EXPONENT
    noise_cdf = np.cumsum(freq / freq.sum())

    rng = np.random.default_rng(cfg.seed)
    syn0 = ((rng.random((len(vocab), cfg.dim)) - 0.5) / cfg.dim).astype(np.float32)
    syn1 = np.zeros((len(vocab), cfg.dim), dtype=np.float32)

    workers = 1 if cfg.deterministic else max(1, cfg.workers)
    if workers == 1:
        _train_pass(sentences, syn0, syn1, noise_cdf, cfg, rng, total_words, offset=0)
    else:
        chunks = [sentences[i::workers] for i in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = []
            done = 0
            for w, chunk in enumerate(chunks):
                chunk_words = sum(s.size for s in chunk) * cfg.epochs
                futures.append(
                    pool.submit(
                        _train_pass, chunk, syn0, syn1, noise_cdf, cfg,
                        np.random.default_rng(cfg.seed + w), total_words, done,
                    )
                )
                done += chunk_words
            for f in futures:
                f.result()

    matrix = EmbeddingMatrix(
        ids=vocab, vectors=syn0, kind="word", source="skipgram", normalized=False
    )
    return WordEmbeddingTable(vectors=matrix, config=cfg, counts={t: counts[t] for t in vocab})


def _train_pass(
    sentences: Sequence[np.ndarray],
    syn0: np.ndarray,
    syn1: np.ndarray,
    noise_cdf: np.ndarray,
    cfg: Word2VecConfig,
    rng: np.random.Generator,
    total_words: int,
    offset: int,
) -> None:
    lr0 = cfg.learning_rate
    processed = offset
    n_neg = cfg.negatives
    last_row = len(noise_cdf) - 1
    for _ in range(cfg.epochs):
        for sent in sentences:
            n = sent.size
            for pos in range(n):
                # Linear decay to zero over all epochs.
                alpha = np.float32(lr0 * (1.0 - processed / total_words))
                processed += 1
                center = sent[pos]
                # Dynamic window shrink, as in the reference trainers.
                win = int(rng.integers(1, cfg.window + 1))
                lo = max(0, pos - win)
                hi = min(n, pos + win + 1)
                h = syn0[center]
                for p2 in range(lo, hi):
                    if p2 == pos:
                        continue
                    target = sent[p2]
                    if n_neg > 0:
                        draws = np.minimum(
                            np.searchsorted(noise_cdf, rng.random(n_neg)), last_row
                        )
                        draws = draws[draws != target]
                        targets = np.concatenate(([target], draws))
                    else:
                        targets = np.asarray([target])
                    labels = np.zeros(targets.size, dtype=np.float32)
                    labels[0] = 1.0
                    w = syn1[targets]
                    g = (labels - _sigmoid(w @ h)) * alpha
                    err = g @ w
                    np.add.at(syn1, targets, np.outer(g, h))
                    syn0[center] = h = h + err


def doc_vector_avg_words(table: WordEmbeddingTable, doc: Document | str) -> np.ndarray:
    """Represent a text as the mean of its in-vocabulary word vectors.

    Out-of-vocabulary tokens are skipped; a fully out-of-vocabulary text
    is an error rather than a silent zero vector.
    """
    text = doc.text if isinstance(doc, Document) else doc
    rows = [table.vectors.row(t) for t in tokenize(text) if t in table.vectors]
    if not rows:
        doc_id = doc.id if isinstance(doc, Document) else "<text>"
        raise DegenerateDataError(f"document {doc_id!r} has no in-vocabulary words")
    return np.mean(table.vectors.vectors[rows].astype(np.float64), axis=0)


class SkipGramVectorizer(BaseEstimator, TransformerMixin):
    """Estimator facade: texts to averaged skip-gram word vectors."""

    def __init__(
        self,
        dim: int = 300,
        window: int = 5,
        negatives: int = 5,
        epochs: int = 10,
        min_count: int = 1,
        learning_rate: float = 0.025,
        seed: int = 0,
        deterministic: bool = True,
        workers: int = 1,
    ):
        self.dim = dim
        self.window = window
        self.negatives = negatives
        self.epochs = epochs
        self.min_count = min_count
        self.learning_rate = learning_rate
        self.seed = seed
        self.deterministic = deterministic
        self.workers = workers

    def _config(self) -> Word2VecConfig:
        return Word2VecConfig(
            dim=self.dim,
            window=self.window,
            negatives=self.negatives,
            epochs=self.epochs,
            min_count=self.min_count,
            learning_rate=self.learning_rate,
            seed=self.seed,
            deterministic=self.deterministic,
            workers=self.workers,
        )

    def fit(self, X, y=None):
        self.table_ = train_word2vec(X, self._config())
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "table_"):
            raise RuntimeError("SkipGramVectorizer is not fitted")
        out = np.zeros((len(X), self.dim), dtype=np.float64)
        bad: list[int] = []
        for i, text in enumerate(X):
            try:
                out[i] = doc_vector_avg_words(self.table_, text)
            except DegenerateDataError:
                bad.append(i)
        if bad:
            raise DegenerateDataError(f"documents with no in-vocabulary words at rows {bad[:8]}")
        return out
