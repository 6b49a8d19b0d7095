"""Similarity-based classifiers over embedding matrices.

Two families share one scoring rule (argmax cosine between document and
class representations):

* the centroid baseline, where each class is represented by the mean of
  its label-keyword embeddings, and
* the label-vector method, where each class is represented by the mean of
  its candidate documents — the documents most similar to the keyword
  centroid — optionally after outlier cleaning.

Both are exposed functionally (operating on :class:`EmbeddingMatrix`)
and as scikit-learn style estimators.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .corpus import ClassSpec, Corpus, tokenize
from .errors import ConsistencyError, DegenerateDataError, InputFormatError
from .lsa import fit_lsa, lsa_project
from .vectors import EmbeddingMatrix, doc_vector_avg_paragraphs, normalize_rows
from .word2vec import Word2VecConfig, doc_vector_avg_words, train_word2vec

__all__ = [
    "ClassVector",
    "LabelVector",
    "PredictionSet",
    "CandidateSet",
    "PipelineConfig",
    "keyword_class_vectors",
    "classify_by_centroid",
    "select_candidates",
    "clean_candidates",
    "compute_label_vectors",
    "classify_by_label_vectors",
    "run_pipeline",
    "write_predictions",
    "parse_clean_policy",
    "KeywordCentroidClassifier",
    "LabelVectorClassifier",
]

ENGINES = ("lsa", "word2vec", "imported-embeddings")
METHODS = ("centroid-baseline", "label-vector")


@dataclass(frozen=True)
class ClassVector:
    """A class represented by the centroid of its keyword embeddings."""

    class_name: str
    vector: np.ndarray
    keyword_count: int = 1

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=np.float64)
        object.__setattr__(self, "vector", v)
        if v.ndim != 1 or np.linalg.norm(v) == 0.0:
            raise DegenerateDataError(f"class {self.class_name!r} has a zero class vector")


@dataclass(frozen=True)
class LabelVector:
    """A class represented by the centroid of its candidate documents."""

    class_name: str
    vector: np.ndarray
    candidate_ids: tuple[str, ...]
    candidate_similarities: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "vector", np.asarray(self.vector, dtype=np.float64))
        sims = self.candidate_similarities
        if any(sims[i] < sims[i + 1] for i in range(len(sims) - 1)):
            raise ConsistencyError("candidate similarities must be non-increasing")


@dataclass(frozen=True)
class CandidateSet:
    """Candidate documents of one class, ordered by similarity (descending)."""

    class_name: str
    ids: tuple[str, ...]
    similarities: tuple[float, ...]
    vectors: np.ndarray


@dataclass
class PredictionSet:
    """Per-document predictions plus run provenance.

    ``scores`` is an (n_docs, n_classes) array aligned with
    ``class_names``, or None for imported predictions without scores.
    ``predicted`` is always the argmax of the score row; exact ties go to
    the first class in spec order and are counted in ``n_ties``.
    Unclassifiable documents (zero or undefined vectors) are listed in
    ``excluded_ids`` instead of being silently misclassified.
    """

    method: str
    engine: str
    config_fingerprint: str
    class_names: list[str]
    ids: list[str]
    predicted: list[str]
    scores: np.ndarray | None = None
    winning: list[float | None] = field(default_factory=list)
    excluded_ids: list[str] = field(default_factory=list)
    n_ties: int = 0

    def __post_init__(self) -> None:
        if len(self.ids) != len(self.predicted):
            raise ConsistencyError("ids and predictions must align")
        if not self.winning:
            if self.scores is not None:
                self.winning = [float(r.max()) for r in self.scores]
            else:
                self.winning = [None] * len(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def score_dict(self, i: int) -> dict[str, float] | None:
        if self.scores is None:
            return None
        return {c: float(s) for c, s in zip(self.class_names, self.scores[i])}


def parse_clean_policy(text: str) -> tuple[str, float]:
    """Parse a policy string: ``none`` or ``sigma(alpha)`` (``sigma`` = alpha 1)."""
    if text == "none":
        return "none", 1.0
    m = re.fullmatch(r"sigma(?:\(([-+0-9.eE]+)\))?", text)
    if not m:
        raise InputFormatError(f"unknown clean policy {text!r}")
    return "sigma", float(m.group(1)) if m.group(1) else 1.0


@dataclass(frozen=True)
class PipelineConfig:
    """Method and engine parameters for one classification run.

    The candidate count ``k`` and optional similarity floor govern
    label-vector construction; candidate outlier cleaning is off by
    default. All randomness flows from ``seed``.
    """

    k: int = 100
    min_similarity: float | None = None
    clean_policy: str = "none"
    clean_alpha: float = 1.0
    n_concepts: int | None = None
    word2vec: Word2VecConfig = field(default_factory=Word2VecConfig)
    seed: int = 0
    deterministic: bool = True

    def canonical(self) -> dict:
        data = {
            "k": self.k,
            "min_similarity": self.min_similarity,
            "clean_policy": self.clean_policy,
            "clean_alpha": self.clean_alpha,
            "n_concepts": self.n_concepts,
            "word2vec": self.word2vec.__dict__,
            "seed": self.seed,
            "deterministic": self.deterministic,
        }
        return data


def config_fingerprint(payload: dict) -> str:
    """Stable short hash of a canonicalized configuration mapping."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Class vectors from keywords


def keyword_class_vectors(
    specs: Sequence[ClassSpec], keyword_matrix: EmbeddingMatrix
) -> list[ClassVector]:
    """Average each class's keyword embeddings into a class vector.

    Keyword records are matched either as ``<class>#<keyword>`` (scoped
    ids, as the exporter emits) or as the bare keyword id. A keyword with
    no vector is an error naming that keyword.
    """
    out: list[ClassVector] = []
    for spec in specs:
        rows: list[int] = []
        for kw in spec.keywords:
            scoped = f"{spec.name}#{kw}"
            if scoped in keyword_matrix:
                rows.append(keyword_matrix.row(scoped))
            elif kw in keyword_matrix:
                rows.append(keyword_matrix.row(kw))
            else:
                raise ConsistencyError(
                    f"no embedding for keyword {kw!r} of class {spec.name!r}"
                )
        centroid = np.mean(keyword_matrix.vectors[rows].astype(np.float64), axis=0)
        out.append(
            ClassVector(class_name=spec.name, vector=centroid, keyword_count=len(rows))
        )
    return out


# ---------------------------------------------------------------------------
# Scoring


def _class_matrix(class_vectors: Sequence[ClassVector | LabelVector]) -> tuple[list[str], np.ndarray]:
    names = [cv.class_name for cv in class_vectors]
    if len(set(names)) != len(names):
        raise ConsistencyError("duplicate class names among class vectors")
    matrix = np.vstack([np.asarray(cv.vector, dtype=np.float64) for cv in class_vectors])
    if np.any(np.linalg.norm(matrix, axis=1) == 0.0):
        raise DegenerateDataError("zero class vector")
    return names, matrix


def _cosine_scores(doc_matrix: np.ndarray, class_matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if doc_matrix.shape[1] != class_matrix.shape[1]:
        raise ConsistencyError(
            f"dimension mismatch: documents {doc_matrix.shape[1]} vs classes {class_matrix.shape[1]}"
        )
    doc_unit, valid = normalize_rows(doc_matrix)
    class_unit, _ = normalize_rows(class_matrix)
    return doc_unit @ class_unit.T, valid


def _predict(
    doc_vectors: EmbeddingMatrix,
    class_vectors: Sequence[ClassVector | LabelVector],
    *,
    method: str,
    engine: str,
    fingerprint: str,
    prior_excluded: Sequence[str] = (),
) -> PredictionSet:
    names, cmat = _class_matrix(class_vectors)
    scores, valid = _cosine_scores(doc_vectors.vectors.astype(np.float64), cmat)
    ids: list[str] = []
    predicted: list[str] = []
    kept_rows: list[int] = []
    excluded = list(prior_excluded)
    n_ties = 0
    for i, doc_id in enumerate(doc_vectors.ids):
        if not valid[i]:
            excluded.append(doc_id)
            continue
        row = scores[i]
        best = int(np.argmax(row))
        if int(np.sum(row == row[best])) > 1:
            n_ties += 1
        ids.append(doc_id)
        predicted.append(names[best])
        kept_rows.append(i)
    return PredictionSet(
        method=method,
        engine=engine,
        config_fingerprint=fingerprint,
        class_names=names,
        ids=ids,
        predicted=predicted,
        scores=scores[kept_rows] if kept_rows else np.zeros((0, len(names))),
        excluded_ids=excluded,
        n_ties=n_ties,
    )


def classify_by_centroid(
    doc_vectors: EmbeddingMatrix,
    class_vectors: Sequence[ClassVector],
    *,
    engine: str = "",
    fingerprint: str = "",
) -> PredictionSet:
    """Assign each document to its highest-cosine keyword centroid."""
    if not class_vectors:
        raise ConsistencyError("need at least one class vector")
    return _predict(
        doc_vectors,
        class_vectors,
        method="centroid-baseline",
        engine=engine,
        fingerprint=fingerprint,
    )


def classify_by_label_vectors(
    doc_vectors: EmbeddingMatrix,
    label_vectors: Sequence[LabelVector | ClassVector],
    *,
    engine: str = "",
    fingerprint: str = "",
) -> PredictionSet:
    """Assign each document to its highest-cosine label vector."""
    if not label_vectors:
        raise ConsistencyError("need at least one label vector")
    return _predict(
        doc_vectors,
        label_vectors,
        method="label-vector",
        engine=engine,
        fingerprint=fingerprint,
    )


# ---------------------------------------------------------------------------
# Label-vector construction


def select_candidates(
    doc_vectors: EmbeddingMatrix,
    class_vector: ClassVector,
    k: int,
    min_similarity: float | None = None,
) -> CandidateSet:
    """Top-k documents by cosine to the class vector, descending.

    An exact full scan; ties keep corpus order. With ``min_similarity``
    the list is truncated to documents at or above the threshold, and an
    empty result is an error for that class.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores, valid = _cosine_scores(
        doc_vectors.vectors.astype(np.float64),
        np.asarray(class_vector.vector, dtype=np.float64)[None, :],
    )
    sims = scores[:, 0]
    sims[~valid] = -np.inf  # zero-vector documents can never be candidates
    order = np.argsort(-sims, kind="stable")[:k]
    order = order[np.isfinite(sims[order])]
    if min_similarity is not None:
        order = order[sims[order] >= min_similarity]
    if order.size == 0:
        raise DegenerateDataError(
            f"no candidate documents for class {class_vector.class_name!r}"
            + (f" at similarity >= {min_similarity}" if min_similarity is not None else "")
        )
    return CandidateSet(
        class_name=class_vector.class_name,
        ids=tuple(doc_vectors.ids[i] for i in order),
        similarities=tuple(float(sims[i]) for i in order),
        vectors=doc_vectors.vectors[order].astype(np.float64),
    )


def clean_candidates(candidates: CandidateSet, policy: str = "none", alpha: float = 1.0) -> CandidateSet:
    """Drop outlier candidates before averaging.

    ``none`` is the identity. ``sigma`` removes candidates whose cosine to
    the candidate centroid falls below mean - alpha * stddev, but never
    removes the last survivor.
    """
    if policy == "none":
        return candidates
    if policy != "sigma":
        raise InputFormatError(f"unknown clean policy {policy!r}")
    if len(candidates.ids) <= 1:
        return candidates
    centroid = candidates.vectors.mean(axis=0)
    if np.linalg.norm(centroid) == 0.0:
        return candidates
    unit, _ = normalize_rows(candidates.vectors)
    cos = unit @ (centroid / np.linalg.norm(centroid))
    keep = cos >= cos.mean() - alpha * cos.std()
    if not np.any(keep):
        keep[int(np.argmax(cos))] = True
    idx = [i for i in range(len(candidates.ids)) if keep[i]]
    return CandidateSet(
        class_name=candidates.class_name,
        ids=tuple(candidates.ids[i] for i in idx),
        similarities=tuple(candidates.similarities[i] for i in idx),
        vectors=candidates.vectors[idx],
    )


def compute_label_vectors(
    doc_vectors: EmbeddingMatrix,
    class_vectors: Sequence[ClassVector],
    cfg: PipelineConfig = PipelineConfig(),
) -> list[LabelVector]:
    """Select, clean, and average candidate documents per class."""
    out: list[LabelVector] = []
    for cv in class_vectors:
        cand = select_candidates(doc_vectors, cv, cfg.k, cfg.min_similarity)
        cand = clean_candidates(cand, cfg.clean_policy, cfg.clean_alpha)
        out.append(
            LabelVector(
                class_name=cv.class_name,
                vector=cand.vectors.mean(axis=0),
                candidate_ids=cand.ids,
                candidate_similarities=cand.similarities,
            )
        )
    return out


# ---------------------------------------------------------------------------
# End-to-end pipeline


def _lsa_representations(corpus, specs, cfg):
    n_concepts = cfg.n_concepts or len(specs)
    model = fit_lsa(corpus, n_concepts, seed=cfg.seed)
    vecs, ids, excluded = [], [], []
    for doc in corpus:
        try:
            vecs.append(lsa_project(model, tokenize(doc.text)))
            ids.append(doc.id)
        except DegenerateDataError:
            excluded.append(doc.id)
    class_vectors = []
    for spec in specs:
        tokens = [t for kw in spec.keywords for t in tokenize(kw)]
        try:
            projected = lsa_project(model, tokens)
        except DegenerateDataError as exc:
            raise ConsistencyError(
                f"keywords {list(spec.keywords)} of class {spec.name!r} "
                "are out of the LSA vocabulary"
            ) from exc
        class_vectors.append(
            ClassVector(spec.name, projected, keyword_count=len(spec.keywords))
        )
    return ids, vecs, excluded, class_vectors, model


def _word2vec_representations(corpus, specs, cfg):
    w2v_cfg = replace(cfg.word2vec, seed=cfg.seed, deterministic=cfg.deterministic)
    table = train_word2vec(corpus, w2v_cfg)
    vecs, ids, excluded = [], [], []
    for doc in corpus:
        try:
            vecs.append(doc_vector_avg_words(table, doc))
            ids.append(doc.id)
        except DegenerateDataError:
            excluded.append(doc.id)
    class_vectors = []
    for spec in specs:
        rows = [
            table.vectors.row(t)
            for kw in spec.keywords
            for t in tokenize(kw)
            if t in table.vectors
        ]
        if not rows:
            raise ConsistencyError(
                f"keywords {list(spec.keywords)} of class {spec.name!r} "
                "are out of the word2vec vocabulary"
            )
        centroid = np.mean(table.vectors.vectors[rows].astype(np.float64), axis=0)
        class_vectors.append(ClassVector(spec.name, centroid, keyword_count=len(spec.keywords)))
    return ids, vecs, excluded, class_vectors, table


def _imported_representations(corpus, specs, paragraph_matrix, keyword_matrix, document_matrix):
    if keyword_matrix is None:
        raise ConsistencyError("imported-embeddings engine requires a keyword matrix")
    if document_matrix is not None:
        # Corpus order; ids in the matrix but not the corpus are ignored.
        ids = [d.id for d in corpus if d.id in document_matrix]
        vecs = [document_matrix.vector(i).astype(np.float64) for i in ids]
        excluded = [d.id for d in corpus if d.id not in document_matrix]
    elif paragraph_matrix is not None:
        vecs, ids, excluded = [], [], []
        for doc in corpus:
            try:
                vecs.append(doc_vector_avg_paragraphs(paragraph_matrix, doc.id))
                ids.append(doc.id)
            except DegenerateDataError:
                excluded.append(doc.id)
    else:
        raise ConsistencyError(
            "imported-embeddings engine requires a paragraph or document matrix"
        )
    class_vectors = keyword_class_vectors(specs, keyword_matrix)
    return ids, vecs, excluded, class_vectors


def run_pipeline(
    corpus: Corpus,
    specs: Sequence[ClassSpec],
    engine: str,
    method: str,
    cfg: PipelineConfig = PipelineConfig(),
    *,
    paragraph_matrix: EmbeddingMatrix | None = None,
    keyword_matrix: EmbeddingMatrix | None = None,
    document_matrix: EmbeddingMatrix | None = None,
    fingerprint: str | None = None,
) -> PredictionSet:
    """Classify a corpus end to end.

    Engines: ``lsa`` (concept space fitted on the corpus, one concept per
    class by default), ``word2vec`` (skip-gram trained on the corpus,
    documents and keywords averaged over word vectors), and
    ``imported-embeddings`` (externally produced paragraph/keyword
    vectors, documents averaged over their paragraphs). Methods:
    ``centroid-baseline`` scores against keyword centroids directly;
    ``label-vector`` scores against candidate-document centroids.
    """
    if engine not in ENGINES:
        raise InputFormatError(f"unknown engine {engine!r}; expected one of {ENGINES}")
    if method not in METHODS:
        raise InputFormatError(f"unknown method {method!r}; expected one of {METHODS}")
    if not specs:
        raise ConsistencyError("need at least one class spec")
    if fingerprint is None:
        fingerprint = config_fingerprint(
            {"engine": engine, "method": method, **cfg.canonical()}
        )

    if engine == "lsa":
        ids, vecs, excluded, class_vectors, _ = _lsa_representations(corpus, specs, cfg)
    elif engine == "word2vec":
        ids, vecs, excluded, class_vectors, _ = _word2vec_representations(corpus, specs, cfg)
    else:
        ids, vecs, excluded, class_vectors = _imported_representations(
            corpus, specs, paragraph_matrix, keyword_matrix, document_matrix
        )

    if not ids:
        raise DegenerateDataError("no classifiable documents (all excluded)")
    doc_matrix = EmbeddingMatrix(
        ids=ids, vectors=np.vstack(vecs), kind="document", source=engine
    )

    if method == "centroid-baseline":
        preds = classify_by_centroid(
            doc_matrix, class_vectors, engine=engine, fingerprint=fingerprint
        )
    else:
        label_vectors = compute_label_vectors(doc_matrix, class_vectors, cfg)
        preds = classify_by_label_vectors(
            doc_matrix, label_vectors, engine=engine, fingerprint=fingerprint
        )
    preds.excluded_ids = excluded + [i for i in preds.excluded_ids if i not in excluded]
    return preds


def write_predictions(preds: PredictionSet, path: str | Path) -> None:
    """Write a prediction set: a header line, then one record per document."""
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "method": preds.method,
            "engine": preds.engine,
            "config_fingerprint": preds.config_fingerprint,
        }
        fh.write(json.dumps(header) + "\n")
        for i, doc_id in enumerate(preds.ids):
            record = {
                "id": doc_id,
                "predicted": preds.predicted[i],
                "score": preds.winning[i],
                "scores": preds.score_dict(i),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# Estimator facades


class KeywordCentroidClassifier(BaseEstimator, ClassifierMixin):
    """Nearest keyword-centroid classification over document vectors.

    Stateless apart from the class vectors handed to the constructor;
    ``fit`` only records the class list. ``predict`` raises on zero
    document vectors (use :func:`classify_by_centroid` for the variant
    that excludes and reports them).
    """

    def __init__(self, class_vectors: Sequence[ClassVector] = ()):
        self.class_vectors = class_vectors

    def fit(self, X=None, y=None):
        if not self.class_vectors:
            raise ConsistencyError("need at least one class vector")
        self.classes_ = np.asarray([cv.class_name for cv in self.class_vectors], dtype=object)
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "classes_"):
            self.fit()
        X = X.vectors if isinstance(X, EmbeddingMatrix) else np.asarray(X, dtype=np.float64)
        _, cmat = _class_matrix(self.class_vectors)
        scores, valid = _cosine_scores(X.astype(np.float64), cmat)
        if not np.all(valid):
            raise DegenerateDataError(
                f"zero document vectors at rows {np.nonzero(~valid)[0][:8].tolist()}"
            )
        return scores

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]


class LabelVectorClassifier(BaseEstimator, ClassifierMixin):
    """Label-vector classification fitted on unlabeled document vectors.

    ``fit(X)`` finds each class's candidate documents within ``X`` by
    similarity to its keyword centroid and averages them into label
    vectors; ``predict`` assigns the highest-cosine label vector.
    """

    def __init__(
        self,
        class_vectors: Sequence[ClassVector] = (),
        k: int = 100,
        min_similarity: float | None = None,
        clean_policy: str = "none",
        clean_alpha: float = 1.0,
    ):
        self.class_vectors = class_vectors
        self.k = k
        self.min_similarity = min_similarity
        self.clean_policy = clean_policy
        self.clean_alpha = clean_alpha

    def fit(self, X, y=None):
        if not self.class_vectors:
            raise ConsistencyError("need at least one class vector")
        matrix = (
            X
            if isinstance(X, EmbeddingMatrix)
            else EmbeddingMatrix(
                ids=[str(i) for i in range(len(X))],
                vectors=np.asarray(X, dtype=np.float64),
            )
        )
        cfg = PipelineConfig(
            k=self.k,
            min_similarity=self.min_similarity,
            clean_policy=self.clean_policy,
            clean_alpha=self.clean_alpha,
        )
        self.label_vectors_ = compute_label_vectors(matrix, self.class_vectors, cfg)
        self.classes_ = np.asarray([lv.class_name for lv in self.label_vectors_], dtype=object)
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "label_vectors_"):
            raise RuntimeError("LabelVectorClassifier is not fitted")
        X = X.vectors if isinstance(X, EmbeddingMatrix) else np.asarray(X, dtype=np.float64)
        _, lmat = _class_matrix(self.label_vectors_)
        scores, valid = _cosine_scores(X.astype(np.float64), lmat)
        if not np.all(valid):
            raise DegenerateDataError(
                f"zero document vectors at rows {np.nonzero(~valid)[0][:8].tolist()}"
            )
        return scores

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]
