"""Corpora, class descriptions, and text segmentation.

Owns the document/corpus structures, the loaders for the supported dataset
formats (JSONL, CSV, 20news-style directories), the label-keyword class
specs, and the sentence/paragraph segmentation used to fit documents into
bounded-length encoder inputs.

All structures are immutable after construction; operations return new
objects and never mutate their inputs.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import yaml

from .errors import ConsistencyError, InputFormatError

__all__ = [
    "Document",
    "Corpus",
    "ClassSpec",
    "ParagraphSet",
    "DatasetManifest",
    "load_corpus",
    "write_corpus",
    "concat_splits",
    "filter_short",
    "sentence_tokenize",
    "split_sentences",
    "split_document",
    "count_words",
    "tokenize",
    "load_class_specs",
    "bundled_spec_path",
    "load_manifest",
    "ingest_manifest",
]

# Split after ., ! or ? when followed by whitespace. Inter-sentence
# whitespace is consumed (re-normalized to a single space on re-joining);
# whitespace inside a sentence is preserved as-is.
_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")

# Token rule for the in-repo vector engines: lowercase, split on
# non-alphanumeric, drop tokens shorter than 2 characters.
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class Document:
    """One classifiable text with an optional gold label."""

    id: str
    text: str
    gold_class: str | None = None


@dataclass(frozen=True)
class Corpus:
    """An ordered, id-unique collection of documents."""

    name: str
    documents: tuple[Document, ...]
    class_names: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ConsistencyError(f"duplicate document id {doc.id!r} in corpus {self.name!r}")
            seen.add(doc.id)
            if doc.gold_class is not None and doc.gold_class not in self.class_names:
                raise ConsistencyError(
                    f"document {doc.id!r} has gold class {doc.gold_class!r} "
                    f"not in class_names of corpus {self.name!r}"
                )

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __getitem__(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except AttributeError:
            object.__setattr__(self, "_by_id", {d.id: d for d in self.documents})
            return self._by_id[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        try:
            self[doc_id]
            return True
        except KeyError:
            return False

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def texts(self) -> list[str]:
        return [d.text for d in self.documents]


@dataclass(frozen=True)
class ClassSpec:
    """A class name plus its ordered label-keyword description."""

    name: str
    keywords: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.keywords:
            raise ConsistencyError(f"class {self.name!r} has an empty keyword list")


@dataclass(frozen=True)
class ParagraphSet:
    """The paragraphs of one document, in original sentence order."""

    doc_id: str
    paragraphs: tuple[str, ...]


def count_words(text: str) -> int:
    """Number of words, a word being a maximal run of non-whitespace."""
    return len(text.split())


def sentence_tokenize(text: str) -> list[str]:
    """Split text into sentences on ``.``, ``!`` or ``?`` followed by whitespace.

    A trailing fragment without a terminator is its own sentence.
    Abbreviations are not special-cased; the splitter is deterministic and
    dependency-free. Returns no empty sentences; for empty or
    whitespace-only input returns ``[]``.
    """
    stripped = text.strip()
    if not stripped:
        return []
    return [s for s in _SENTENCE_BOUNDARY.split(stripped) if s]


def split_sentences(sentences: Sequence[str], max_seq_len: int) -> list[list[str]]:
    """Greedily group sentences into paragraphs bounded by ``max_seq_len / 2`` words.

    A sentence joins the current paragraph only while the combined word
    count stays strictly below half the maximum sequence length; otherwise
    the paragraph is closed and the triggering sentence starts the next
    one. The final non-empty paragraph is always emitted, so no sentence
    is ever dropped. A single sentence longer than the threshold forms a
    paragraph by itself.
    """
    if max_seq_len < 2:
        raise ValueError("max_seq_len must be >= 2")
    threshold = max_seq_len / 2
    paragraphs: list[list[str]] = []
    current: list[str] = []
    current_words = 0
    for sentence in sentences:
        n = count_words(sentence)
        if current_words + n < threshold:
            current.append(sentence)
            current_words += n
        else:
            if current:
                paragraphs.append(current)
            current = [sentence]
            current_words = n
    if current:
        paragraphs.append(current)
    return paragraphs


def split_document(doc: Document, max_seq_len: int) -> ParagraphSet:
    """Segment a document into paragraphs of whole sentences.

    Sentences are joined with single spaces inside each paragraph;
    re-tokenizing the paragraphs reproduces the document's sentence
    sequence exactly.
    """
    groups = split_sentences(sentence_tokenize(doc.text), max_seq_len)
    return ParagraphSet(doc_id=doc.id, paragraphs=tuple(" ".join(g) for g in groups))


def tokenize(text: str) -> list[str]:
    """Tokens for the LSA and skip-gram engines.

    Lowercases, splits on non-alphanumeric characters, and drops tokens
    shorter than 2 characters.
    """
    return [t for t in _TOKEN.findall(text.lower()) if len(t) >= 2]


# ---------------------------------------------------------------------------
# Loading and combining corpora


def load_corpus(
    path: str | Path,
    format: str = "jsonl",
    *,
    name: str | None = None,
    columns: Mapping[str, str | None] | None = None,
    label_map: Mapping[str, str] | None = None,
    class_names: Iterable[str] | None = None,
) -> Corpus:
    """Load a corpus from disk.

    Supported formats:

    * ``jsonl`` — one ``{"id", "text", "class"}`` object per line
      (``class`` may be null or absent).
    * ``csv`` — requires a ``columns`` mapping with keys ``text`` and
      optionally ``id`` / ``class`` naming the source columns. Missing
      ``id`` column: row-index ids are generated. ``label_map`` rewrites
      raw label values (e.g. numeric codes) to descriptive class names.
    * ``20news-dir`` — a directory with one subdirectory per class, one
      file per document; ids are ``<class>/<filename>``.

    Malformed records raise :class:`InputFormatError` carrying the line
    number; duplicate ids raise :class:`ConsistencyError`.
    """
    path = Path(path)
    if name is None:
        name = path.stem if path.suffix else path.name
    if format == "jsonl":
        docs = list(_read_jsonl(path))
    elif format == "csv":
        if columns is None or "text" not in columns:
            raise InputFormatError("csv format requires a column mapping with a 'text' column")
        docs = list(_read_csv(path, columns, label_map))
    elif format == "20news-dir":
        docs = list(_read_class_dirs(path))
    else:
        raise InputFormatError(f"unknown corpus format {format!r}")

    if class_names is None:
        class_names = {d.gold_class for d in docs if d.gold_class is not None}
    return Corpus(name=name, documents=tuple(docs), class_names=frozenset(class_names))


def _read_jsonl(path: Path) -> Iterator[Document]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict) or "id" not in record or "text" not in record:
                raise InputFormatError(f"{path}:{lineno}: record must have 'id' and 'text'")
            yield Document(
                id=str(record["id"]),
                text=str(record["text"]),
                gold_class=record.get("class"),
            )


def _read_csv(
    path: Path,
    columns: Mapping[str, str | None],
    label_map: Mapping[str, str] | None,
) -> Iterator[Document]:
    id_col = columns.get("id")
    text_col = columns["text"]
    class_col = columns.get("class")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for rownum, row in enumerate(reader):
            lineno = reader.line_num
            if text_col not in row or row[text_col] is None:
                raise InputFormatError(f"{path}:{lineno}: missing column {text_col!r}")
            doc_id = row[id_col] if id_col else f"{path.stem}-{rownum}"
            if doc_id is None:
                raise InputFormatError(f"{path}:{lineno}: missing column {id_col!r}")
            gold = None
            if class_col:
                if class_col not in row:
                    raise InputFormatError(f"{path}:{lineno}: missing column {class_col!r}")
                raw = row[class_col]
                if raw is not None and raw != "":
                    if label_map is not None:
                        if str(raw) not in label_map:
                            raise InputFormatError(
                                f"{path}:{lineno}: label {raw!r} not in label map"
                            )
                        gold = label_map[str(raw)]
                    else:
                        gold = str(raw)
            yield Document(id=str(doc_id), text=row[text_col], gold_class=gold)


def _read_class_dirs(root: Path) -> Iterator[Document]:
    if not root.is_dir():
        raise InputFormatError(f"{root}: not a directory")
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for file in sorted(p for p in class_dir.iterdir() if p.is_file()):
            text = file.read_text(encoding="utf-8", errors="replace")
            yield Document(id=f"{class_dir.name}/{file.name}", text=text, gold_class=class_dir.name)


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus in the canonical JSONL interchange format."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus:
            fh.write(
                json.dumps(
                    {"id": doc.id, "text": doc.text, "class": doc.gold_class},
                    ensure_ascii=False,
                )
                + "\n"
            )


def concat_splits(train: Corpus, test: Corpus) -> Corpus:
    """Concatenate two splits of the same dataset, train first.

    Class-name sets must agree and ids must be disjoint.
    """
    if train.class_names != test.class_names:
        raise ConsistencyError(
            f"class names differ between splits: {sorted(train.class_names)} "
            f"vs {sorted(test.class_names)}"
        )
    collisions = {d.id for d in train} & {d.id for d in test}
    if collisions:
        raise ConsistencyError(f"id collision between splits: {sorted(collisions)[:5]}")
    return Corpus(
        name=train.name,
        documents=train.documents + test.documents,
        class_names=train.class_names,
    )


def filter_short(corpus: Corpus, min_words: int) -> Corpus:
    """Keep only documents with at least ``min_words`` whitespace-words.

    ``min_words=2`` reproduces the cleaning rule that removes empty and
    one-word documents.
    """
    if min_words < 1:
        raise ValueError("min_words must be >= 1")
    kept = tuple(d for d in corpus if count_words(d.text) >= min_words)
    return replace(corpus, documents=kept)


# ---------------------------------------------------------------------------
# Class specs and dataset manifests


def load_class_specs(path: str | Path) -> list[ClassSpec]:
    """Load a class-spec file (YAML or JSON by extension).

    The document lists classes, each with ``name`` and a non-empty
    ``keywords`` array; either a top-level list or a ``classes`` key.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(fh)
        else:
            data = json.load(fh)
    if isinstance(data, Mapping):
        data = data.get("classes")
    if not isinstance(data, list):
        raise InputFormatError(f"{path}: expected a list of classes or a 'classes' key")
    specs: list[ClassSpec] = []
    names: set[str] = set()
    for i, entry in enumerate(data):
        if not isinstance(entry, Mapping) or "name" not in entry or "keywords" not in entry:
            raise InputFormatError(f"{path}: class #{i} must have 'name' and 'keywords'")
        name = str(entry["name"])
        keywords = entry["keywords"]
        if not isinstance(keywords, list) or not keywords:
            raise ConsistencyError(f"{path}: class {name!r} has an empty keyword list")
        if name in names:
            raise ConsistencyError(f"{path}: duplicate class name {name!r}")
        names.add(name)
        specs.append(ClassSpec(name=name, keywords=tuple(str(k) for k in keywords)))
    return specs


def bundled_spec_path(dataset: str) -> Path:
    """Path of a class-spec file shipped with the package.

    Known names: ``20newsgroups``, ``ag_corpus``, ``yahoo_answers``,
    ``medical_abstracts``.
    """
    path = Path(__file__).parent / "data" / "class_specs" / f"{dataset}.yaml"
    if not path.exists():
        raise InputFormatError(f"no bundled class spec named {dataset!r}")
    return path


@dataclass(frozen=True)
class DatasetManifest:
    """Declarative description of how to ingest one dataset.

    ``expected_counts`` maps class name to ``{"train": n, "test": n,
    "total": n}`` (any subset of the three keys) and is validated after
    ingestion when present.
    """

    name: str
    format: str
    train_path: str
    test_path: str | None = None
    columns: Mapping[str, str | None] | None = None
    label_map: Mapping[str, str] | None = None
    min_words: int | None = None
    class_spec: str | None = None
    expected_counts: Mapping[str, Mapping[str, int]] = field(default_factory=dict)
    expected_totals: Mapping[str, int] = field(default_factory=dict)


def load_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(fh)
        else:
            data = json.load(fh)
    if not isinstance(data, Mapping):
        raise InputFormatError(f"{path}: manifest must be a mapping")
    missing = {"name", "format", "train_path"} - set(data)
    if missing:
        raise InputFormatError(f"{path}: manifest missing keys {sorted(missing)}")
    label_map = data.get("label_map")
    if label_map is not None:
        label_map = {str(k): str(v) for k, v in label_map.items()}
    return DatasetManifest(
        name=str(data["name"]),
        format=str(data["format"]),
        train_path=str(data["train_path"]),
        test_path=str(data["test_path"]) if data.get("test_path") else None,
        columns=data.get("columns"),
        label_map=label_map,
        min_words=int(data["min_words"]) if data.get("min_words") else None,
        class_spec=str(data["class_spec"]) if data.get("class_spec") else None,
        expected_counts={
            str(c): {str(k): int(v) for k, v in counts.items()}
            for c, counts in (data.get("expected_counts") or {}).items()
        },
        expected_totals={str(k): int(v) for k, v in (data.get("expected_totals") or {}).items()},
    )


def ingest_manifest(manifest: DatasetManifest, data_dir: str | Path = ".") -> tuple[Corpus, dict]:
    """Load, concatenate, filter, and validate a dataset per its manifest.

    Returns the final corpus and a validation report. Count mismatches
    raise :class:`ConsistencyError` naming the offending class; the report
    (returned before filtering errors) records actual vs expected counts
    and the number of documents removed by the length filter.
    """
    data_dir = Path(data_dir)

    def _load(split_path: str, split: str) -> Corpus:
        p = data_dir / split_path
        if not p.exists():
            raise FileNotFoundError(f"{manifest.name}: {split} file not found: {p}")
        return load_corpus(
            p,
            manifest.format,
            name=f"{manifest.name}-{split}",
            columns=manifest.columns,
            label_map=manifest.label_map,
        )

    train = _load(manifest.train_path, "train")
    splits: dict[str, Corpus] = {"train": train}
    if manifest.test_path:
        test = _load(manifest.test_path, "test")
        # One split may not cover every class; unify the universe first.
        universe = train.class_names | test.class_names
        if manifest.label_map:
            universe |= set(manifest.label_map.values())
        train = replace(train, class_names=frozenset(universe))
        test = replace(test, class_names=frozenset(universe))
        combined = concat_splits(train, test)
        splits = {"train": train, "test": test}
    else:
        combined = train
    combined = replace(combined, name=manifest.name)

    report: dict = {"dataset": manifest.name, "classes": {}, "checks": []}
    for cname in sorted(combined.class_names):
        entry = {
            split: sum(1 for d in c if d.gold_class == cname) for split, c in splits.items()
        }
        entry["total"] = sum(1 for d in combined if d.gold_class == cname)
        report["classes"][cname] = entry

    for cname, expected in manifest.expected_counts.items():
        actual = report["classes"].get(cname)
        if actual is None:
            raise ConsistencyError(f"{manifest.name}: expected class {cname!r} not present")
        for key, want in expected.items():
            got = actual.get(key)
            report["checks"].append(
                {"class": cname, "split": key, "expected": want, "actual": got}
            )
            if got != want:
                raise ConsistencyError(
                    f"{manifest.name}: class {cname!r} {key} count {got} != expected {want}"
                )
    for key, want in manifest.expected_totals.items():
        got = len(splits[key]) if key in splits else len(combined)
        report["checks"].append({"class": None, "split": key, "expected": want, "actual": got})
        if got != want:
            raise ConsistencyError(f"{manifest.name}: {key} total {got} != expected {want}")

    # Ingested documents are never empty: an unset min_words still drops
    # zero-word texts, stricter rules come from the manifest.
    min_words = manifest.min_words if manifest.min_words is not None else 1
    before = len(combined)
    combined = filter_short(combined, min_words)
    report["n_documents"] = len(combined)
    report["n_removed_short"] = before - len(combined)
    return combined, report
