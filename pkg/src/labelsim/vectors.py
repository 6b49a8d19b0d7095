"""Dense vector algebra and the embedding interchange formats.

An :class:`EmbeddingMatrix` is the lingua franca between representation
engines (LSA, skip-gram, external encoders) and the classifiers: an
id-indexed block of fixed-dimension vectors with an optional parent link
per record (paragraph -> document, keyword -> class).

Two on-disk representations are supported and auto-detected on load:

* JSONL: line 1 is a header ``{"dim", "model", "kind", "normalized"}``;
  each further line is ``{"id", "parent", "vector"}`` with numbers at
  float32 precision.
* Packed binary: magic ``LVK1``, little-endian u32 dim, u64 record count,
  then per record u16 id length, id bytes, u16 parent length, parent
  bytes, dim float32 values. A zero-length parent encodes "no parent".
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, DegenerateDataError, InputFormatError

__all__ = [
    "cosine",
    "mean_vector",
    "EmbeddingMatrix",
    "load_embedding_file",
    "write_embedding_file",
    "doc_vector_avg_paragraphs",
]

_MAGIC = b"LVK1"
_NORM_TOLERANCE = 1e-5
_NORM_SAMPLE = 64


def _as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite components")
    return arr


def cosine(u, v) -> float:
    """Cosine similarity of two equal-dimension nonzero vectors."""
    a = _as_vector(u, "u")
    b = _as_vector(v, "v")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DegenerateDataError("cosine is undefined for a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def mean_vector(vs: Sequence) -> np.ndarray:
    """Componentwise arithmetic mean of a non-empty list of vectors."""
    if len(vs) == 0:
        raise DegenerateDataError("mean of an empty vector list")
    arrs = [_as_vector(v) for v in vs]
    dim = arrs[0].shape[0]
    for a in arrs[1:]:
        if a.shape[0] != dim:
            raise ValueError(f"dimension mismatch: {a.shape[0]} vs {dim}")
    return np.mean(arrs, axis=0)


def normalize_rows(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit-normalize rows; zero rows are left zero and flagged.

    Returns ``(unit_rows, nonzero_mask)``.
    """
    arr = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(arr, axis=1)
    nonzero = norms > 0.0
    out = np.zeros_like(arr)
    out[nonzero] = arr[nonzero] / norms[nonzero, None]
    return out, nonzero


@dataclass
class EmbeddingMatrix:
    """Id-indexed dense vectors of one kind (word/paragraph/document/keyword)."""

    ids: list[str]
    vectors: np.ndarray
    kind: str = "document"
    source: str = ""
    normalized: bool = False
    parents: list[str | None] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        if len(self.ids) != self.vectors.shape[0]:
            raise ConsistencyError(
                f"{len(self.ids)} ids but {self.vectors.shape[0]} vectors"
            )
        if not self.parents:
            self.parents = [None] * len(self.ids)
        if len(self.parents) != len(self.ids):
            raise ConsistencyError("parents must align with ids")
        if len(set(self.ids)) != len(self.ids):
            raise ConsistencyError("embedding ids must be unique")
        self._index = {i: row for row, i in enumerate(self.ids)}

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __contains__(self, id_: str) -> bool:
        return id_ in self._index

    def row(self, id_: str) -> int:
        try:
            return self._index[id_]
        except KeyError:
            raise KeyError(f"id {id_!r} not in embedding matrix") from None

    def vector(self, id_: str) -> np.ndarray:
        return self.vectors[self.row(id_)]

    def rows_for_parent(self, parent: str) -> list[int]:
        return [r for r, p in enumerate(self.parents) if p == parent]

    def validate_normalization(self, sample: int = _NORM_SAMPLE) -> None:
        """Check unit norms on an evenly spaced sample of records."""
        if not self.normalized or len(self) == 0:
            return
        idx = np.unique(np.linspace(0, len(self) - 1, num=min(sample, len(self)), dtype=int))
        norms = np.linalg.norm(self.vectors[idx].astype(np.float64), axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > _NORM_TOLERANCE)[0]
        if bad.size:
            i = int(idx[bad[0]])
            raise ConsistencyError(
                f"matrix declared normalized but record {i} ({self.ids[i]!r}) "
                f"has norm {norms[bad[0]]:.6f}"
            )


def doc_vector_avg_paragraphs(matrix: EmbeddingMatrix, doc_id: str) -> np.ndarray:
    """Mean of a document's paragraph vectors (records with parent == doc_id)."""
    rows = matrix.rows_for_parent(doc_id)
    if not rows:
        raise DegenerateDataError(f"no paragraph vectors for document {doc_id!r}")
    return np.mean(matrix.vectors[rows].astype(np.float64), axis=0)


# ---------------------------------------------------------------------------
# File formats


def _f32(value: float) -> float:
    # Round-trip through float32 so the JSON text carries exactly the
    # precision that the binary format does.
    return float(np.float32(value))


def write_embedding_file(matrix: EmbeddingMatrix, path: str | Path, format: str = "jsonl") -> None:
    path = Path(path)
    if format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            header = {
                "dim": matrix.dim,
                "model": matrix.source,
                "kind": matrix.kind,
                "normalized": matrix.normalized,
            }
            fh.write(json.dumps(header) + "\n")
            for id_, parent, vec in zip(matrix.ids, matrix.parents, matrix.vectors):
                record = {
                    "id": id_,
                    "parent": parent,
                    "vector": [_f32(x) for x in vec],
                }
                fh.write(json.dumps(record) + "\n")
    elif format == "packed":
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<IQ", matrix.dim, len(matrix)))
            for id_, parent, vec in zip(matrix.ids, matrix.parents, matrix.vectors):
                id_b = id_.encode("utf-8")
                parent_b = (parent or "").encode("utf-8")
                fh.write(struct.pack("<H", len(id_b)))
                fh.write(id_b)
                fh.write(struct.pack("<H", len(parent_b)))
                fh.write(parent_b)
                fh.write(np.asarray(vec, dtype="<f4").tobytes())
    else:
        raise InputFormatError(f"unknown embedding format {format!r}")


def load_embedding_file(path: str | Path) -> EmbeddingMatrix:
    """Load an embedding file (JSONL or packed binary, auto-detected).

    Every record must match the header dimension (errors carry the record
    index); a declared ``normalized`` flag is verified on a sample.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
    matrix = _load_packed(path) if magic == _MAGIC else _load_jsonl(path)
    matrix.validate_normalization()
    return matrix


def _load_jsonl(path: Path) -> EmbeddingMatrix:
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise InputFormatError(f"{path}: missing embedding header")
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"{path}:1: invalid header JSON: {exc}") from exc
        for key in ("dim", "model", "kind", "normalized"):
            if key not in header:
                raise InputFormatError(f"{path}: header missing {key!r}")
        dim = int(header["dim"])
        if dim <= 0:
            raise InputFormatError(f"{path}: non-positive dim {dim}")
        ids: list[str] = []
        parents: list[str | None] = []
        rows: list[np.ndarray] = []
        for index, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputFormatError(f"{path}: record {index}: invalid JSON: {exc}") from exc
            vec = record.get("vector")
            if not isinstance(vec, list) or len(vec) != dim:
                raise ConsistencyError(
                    f"{path}: record {index} ({record.get('id')!r}) has "
                    f"{len(vec) if isinstance(vec, list) else 'no'} components, expected {dim}"
                )
            ids.append(str(record["id"]))
            parents.append(record.get("parent"))
            rows.append(np.asarray(vec, dtype=np.float32))
    vectors = np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
    return EmbeddingMatrix(
        ids=ids,
        vectors=vectors,
        kind=str(header["kind"]),
        source=str(header["model"]),
        normalized=bool(header["normalized"]),
        parents=parents,
    )


def _load_packed(path: Path) -> EmbeddingMatrix:
    with open(path, "rb") as fh:
        fh.read(4)
        head = fh.read(12)
        if len(head) != 12:
            raise InputFormatError(f"{path}: truncated packed header")
        dim, count = struct.unpack("<IQ", head)
        if dim == 0:
            raise InputFormatError(f"{path}: non-positive dim in packed header")
        ids: list[str] = []
        parents: list[str | None] = []
        vectors = np.zeros((count, dim), dtype=np.float32)
        for index in range(count):
            try:
                (id_len,) = struct.unpack("<H", fh.read(2))
                id_ = fh.read(id_len).decode("utf-8")
                (parent_len,) = struct.unpack("<H", fh.read(2))
                parent = fh.read(parent_len).decode("utf-8") if parent_len else None
                buf = fh.read(4 * dim)
                if len(buf) != 4 * dim:
                    raise struct.error("short read")
            except (struct.error, UnicodeDecodeError) as exc:
                raise InputFormatError(f"{path}: record {index}: truncated or corrupt") from exc
            ids.append(id_)
            parents.append(parent)
            vectors[index] = np.frombuffer(buf, dtype="<f4")
        if fh.read(1):
            raise InputFormatError(f"{path}: trailing bytes after {count} records")
    # Kind/model are not part of the packed layout; callers that need them
    # should prefer JSONL. Loaded packed files default to document kind.
    return EmbeddingMatrix(
        ids=ids, vectors=vectors, kind="document", source="packed", parents=parents
    )
