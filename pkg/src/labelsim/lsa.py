"""Latent semantic analysis: TF-IDF term-document matrix plus truncated SVD.

The concept space is learned from the corpus; documents and keyword sets
are then folded in as TF-IDF pseudo-documents scaled by the inverse
singular values. One concept per target class is the intended usage for
classification.

Weighting is raw term frequency times a smoothed log inverse document
frequency, ``idf(t) = ln((1 + N) / (1 + df(t))) + 1``, which keeps every
in-vocabulary term strictly positive.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import Corpus, tokenize
from .errors import DegenerateDataError, InputFormatError

__all__ = ["LsaModel", "fit_lsa", "lsa_project", "randomized_svd", "LsaVectorizer"]

# Dense exact SVD below this edge length; randomized above.
_DENSE_SVD_LIMIT = 2000
_OVERSAMPLE = 10
_POWER_ITERATIONS = 4


def randomized_svd(
    matrix, k: int, *, oversample: int = _OVERSAMPLE, n_iter: int = _POWER_ITERATIONS, seed: int = 0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded randomized truncated SVD with power iterations.

    Returns ``(U, s, Vt)`` with the top ``k`` singular triples. Works on
    dense or scipy.sparse input.
    """
    n_rows, n_cols = matrix.shape
    rank_cap = min(n_rows, n_cols)
    if k > rank_cap:
        raise ValueError(f"k={k} exceeds min(shape)={rank_cap}")
    rng = np.random.default_rng(seed)
    n_random = min(k + oversample, rank_cap)
    sketch = rng.standard_normal((n_cols, n_random))
    sample = matrix @ sketch
    q, _ = np.linalg.qr(sample)
    for _ in range(n_iter):
        z, _ = np.linalg.qr(matrix.T @ q)
        q, _ = np.linalg.qr(matrix @ z)
    small = (matrix.T @ q).T  # q.T @ matrix without densifying sparse input
    u_small, s, vt = scipy.linalg.svd(small, full_matrices=False)
    u = q @ u_small
    return u[:, :k], s[:k], vt[:k, :]


def _fix_signs(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Reproducible basis: the largest-magnitude component of each left
    # singular vector is made positive.
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            vt[j, :] = -vt[j, :]
    return u, vt


@dataclass
class LsaModel:
    """Fitted concept space: vocabulary, idf weights, and SVD factors.

    ``basis`` holds the left singular vectors (terms x concepts);
    ``doc_vectors`` the right singular vectors (documents x concepts),
    i.e. the training documents' concept representations.
    """

    terms: list[str]
    idf: np.ndarray
    basis: np.ndarray
    singular_values: np.ndarray
    n_concepts: int
    doc_ids: list[str]
    doc_vectors: np.ndarray

    def __post_init__(self) -> None:
        self.term_index = {t: i for i, t in enumerate(self.terms)}
        s = self.singular_values
        if np.any(s < 0) or np.any(np.diff(s) > 0):
            raise ValueError("singular values must be non-negative and non-increasing")

    def save(self, path: str | Path) -> None:
        payload = {
            "n_concepts": self.n_concepts,
            "terms": self.terms,
            "idf": [float(x) for x in self.idf],
            "singular_values": [float(x) for x in self.singular_values],
            "basis": [[float(x) for x in row] for row in self.basis],
            "doc_ids": self.doc_ids,
            "doc_vectors": [[float(x) for x in row] for row in self.doc_vectors],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> "LsaModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        try:
            return cls(
                terms=list(payload["terms"]),
                idf=np.asarray(payload["idf"], dtype=np.float64),
                basis=np.asarray(payload["basis"], dtype=np.float64),
                singular_values=np.asarray(payload["singular_values"], dtype=np.float64),
                n_concepts=int(payload["n_concepts"]),
                doc_ids=list(payload["doc_ids"]),
                doc_vectors=np.asarray(payload["doc_vectors"], dtype=np.float64),
            )
        except (KeyError, TypeError) as exc:
            raise InputFormatError(f"{path}: not a valid LSA model file: {exc}") from exc


def _token_lists(corpus: Corpus | Iterable[Sequence[str] | str]) -> tuple[list[str], list[list[str]]]:
    ids: list[str] = []
    token_lists: list[list[str]] = []
    if isinstance(corpus, Corpus):
        for doc in corpus:
            ids.append(doc.id)
            token_lists.append(tokenize(doc.text))
    else:
        for i, item in enumerate(corpus):
            ids.append(str(i))
            token_lists.append(tokenize(item) if isinstance(item, str) else list(item))
    return ids, token_lists


def fit_lsa(corpus: Corpus | Iterable, n_concepts: int, *, seed: int = 0) -> LsaModel:
    """Fit the concept space on a corpus (or iterable of texts/token lists).

    Builds the TF-IDF weighted term-document matrix and keeps the top
    ``n_concepts`` singular triples. The basis is deterministic for a
    given input: the dense exact path is used when both matrix edges are
    below 2000, a seeded randomized SVD otherwise.
    """
    if n_concepts < 1:
        raise ValueError("n_concepts must be >= 1")
    doc_ids, token_lists = _token_lists(corpus)
    n_docs = len(doc_ids)

    vocabulary = sorted({t for tokens in token_lists for t in tokens})
    if not vocabulary:
        raise DegenerateDataError("empty vocabulary: no tokens survive tokenization")
    if n_concepts > min(len(vocabulary), n_docs):
        raise DegenerateDataError(
            f"n_concepts={n_concepts} exceeds min(vocabulary={len(vocabulary)}, "
            f"documents={n_docs})"
        )
    term_index = {t: i for i, t in enumerate(vocabulary)}

    df = np.zeros(len(vocabulary), dtype=np.float64)
    for tokens in token_lists:
        for t in set(tokens):
            df[term_index[t]] += 1
    idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0

    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for j, tokens in enumerate(token_lists):
        for t, tf in Counter(tokens).items():
            i = term_index[t]
            rows.append(i)
            cols.append(j)
            vals.append(tf * idf[i])
    matrix = sp.csr_matrix(
        (vals, (rows, cols)), shape=(len(vocabulary), n_docs), dtype=np.float64
    )

    if max(matrix.shape) < _DENSE_SVD_LIMIT:
        u, s, vt = scipy.linalg.svd(matrix.toarray(), full_matrices=False)
        u, s, vt = u[:, :n_concepts], s[:n_concepts], vt[:n_concepts, :]
    else:
        u, s, vt = randomized_svd(matrix, n_concepts, seed=seed)
    u, vt = _fix_signs(u, vt)

    return LsaModel(
        terms=vocabulary,
        idf=idf,
        basis=u,
        singular_values=s,
        n_concepts=n_concepts,
        doc_ids=doc_ids,
        doc_vectors=vt.T.copy(),
    )


def lsa_project(model: LsaModel, tokens: Sequence[str]) -> np.ndarray:
    """Fold a token list into the concept space as a TF-IDF pseudo-document.

    ``v = S^-1 U^T x`` with raw term counts times idf; out-of-vocabulary
    tokens are skipped, and a fully out-of-vocabulary input is an error.
    Keyword sets are projected the same way as documents.
    """
    x = np.zeros(len(model.terms), dtype=np.float64)
    known = 0
    for t, tf in Counter(tokens).items():
        i = model.term_index.get(t)
        if i is not None:
            x[i] = tf * model.idf[i]
            known += 1
    if known == 0:
        raise DegenerateDataError(f"all tokens out of vocabulary: {list(tokens)[:8]}")
    return (model.basis.T @ x) / model.singular_values


class LsaVectorizer(BaseEstimator, TransformerMixin):
    """Estimator facade: raw documents to LSA concept vectors.

    ``fit`` learns the concept space from an iterable of texts,
    ``transform`` folds texts in. Rows that lose every token raise rather
    than silently becoming zero vectors.
    """

    def __init__(self, n_concepts: int = 2, seed: int = 0):
        self.n_concepts = n_concepts
        self.seed = seed

    def fit(self, X, y=None):
        self.model_ = fit_lsa(X, self.n_concepts, seed=self.seed)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "model_"):
            raise RuntimeError("LsaVectorizer is not fitted")
        out = np.zeros((len(X), self.n_concepts), dtype=np.float64)
        bad: list[int] = []
        for i, text in enumerate(X):
            tokens = tokenize(text) if isinstance(text, str) else list(text)
            try:
                out[i] = lsa_project(self.model_, tokens)
            except DegenerateDataError:
                bad.append(i)
        if bad:
            raise DegenerateDataError(f"documents with no in-vocabulary tokens at rows {bad[:8]}")
        return out
