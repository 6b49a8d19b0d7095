"""Classification metrics and the correlation analysis.

Micro-averaged F1 is the headline metric; in the single-label
multi-class setting it equals accuracy (and micro precision and recall)
whenever every document is scored. Unclassifiable documents can be
counted two ways: the strict headline treats them as misses (whole-corpus
denominators), the scored-only variant ignores them.

Kendall's tau (tau-b, tie-corrected) with a two-sided significance test
supports the class-length vs F1 analysis.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .classify import PredictionSet
from .corpus import Corpus, count_words
from .errors import ConsistencyError, DegenerateDataError, InputFormatError

__all__ = [
    "EvalReport",
    "CorrelationResult",
    "evaluate_predictions",
    "micro_f1",
    "per_class_f1",
    "kendall_tau",
    "avg_doc_words_per_class",
    "correlate_length_vs_f1",
    "import_predictions",
    "render_report",
]

_EXACT_P_MAX_N = 8


@dataclass
class EvalReport:
    """Aggregated classification quality for one prediction set."""

    micro_f1: float
    micro_f1_scored_only: float
    per_class_f1: dict[str, float]
    confusion: dict[str, dict[str, int]]
    n_scored: int
    n_excluded: int
    empty_classes: list[str] = field(default_factory=list)
    method: str = ""
    engine: str = ""
    config_fingerprint: str = ""
    dataset: str = ""

    def to_json(self) -> dict:
        return {
            "micro_f1": self.micro_f1,
            "micro_f1_scored_only": self.micro_f1_scored_only,
            "per_class_f1": self.per_class_f1,
            "confusion": self.confusion,
            "n_scored": self.n_scored,
            "n_excluded": self.n_excluded,
            "empty_classes": self.empty_classes,
            "method": self.method,
            "engine": self.engine,
            "config_fingerprint": self.config_fingerprint,
            "dataset": self.dataset,
        }


@dataclass(frozen=True)
class CorrelationResult:
    """Kendall's tau with a two-sided p-value."""

    tau: float
    p_value: float
    n: int
    tie_corrected: bool

    def to_json(self) -> dict:
        return {"tau": self.tau, "p_value": self.p_value, "n": self.n}


def _f1(precision: float, recall: float) -> float:
    if precision == recall:  # harmonic mean of equal values, kept exact
        return precision
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def evaluate_predictions(preds: PredictionSet, gold: Corpus) -> EvalReport:
    """Score a prediction set against a gold corpus.

    Every scored prediction must reference a document with a gold class.
    Gold-labeled documents missing from the predictions count as excluded:
    they lower the strict (headline) micro-F1 but not the scored-only one.
    """
    if len(preds) == 0:
        raise ConsistencyError("prediction set scores no documents")
    if len(set(preds.ids)) != len(preds.ids):
        raise ConsistencyError("prediction set contains duplicate document ids")
    gold_by_id = {d.id: d.gold_class for d in gold if d.gold_class is not None}
    class_names = sorted(set(gold.class_names) | set(preds.class_names))

    confusion: dict[str, dict[str, int]] = {
        g: {p: 0 for p in class_names} for g in class_names
    }
    correct = 0
    for i, doc_id in enumerate(preds.ids):
        if doc_id not in gold_by_id:
            raise ConsistencyError(f"prediction for {doc_id!r} has no gold class")
        g = gold_by_id[doc_id]
        p = preds.predicted[i]
        if p not in confusion[g]:
            raise ConsistencyError(f"predicted class {p!r} unknown to the gold corpus")
        confusion[g][p] += 1
        if g == p:
            correct += 1

    n_scored = len(preds)
    scored_ids = set(preds.ids)
    n_excluded = sum(1 for doc_id in gold_by_id if doc_id not in scored_ids)

    scored_only = correct / n_scored
    precision = correct / n_scored
    recall = correct / (n_scored + n_excluded)
    strict = _f1(precision, recall)

    per_class: dict[str, float] = {}
    empty: list[str] = []
    for c in class_names:
        tp = confusion[c][c]
        fn = sum(confusion[c][p] for p in class_names) - tp
        fp = sum(confusion[g][c] for g in class_names) - tp
        if tp == 0 and fn == 0 and fp == 0:
            per_class[c] = 0.0
            empty.append(c)
            continue
        p_c = tp / (tp + fp) if tp + fp else 0.0
        r_c = tp / (tp + fn) if tp + fn else 0.0
        per_class[c] = _f1(p_c, r_c)

    return EvalReport(
        micro_f1=strict,
        micro_f1_scored_only=scored_only,
        per_class_f1=per_class,
        confusion=confusion,
        n_scored=n_scored,
        n_excluded=n_excluded,
        empty_classes=empty,
        method=preds.method,
        engine=preds.engine,
        config_fingerprint=preds.config_fingerprint,
        dataset=gold.name,
    )


def micro_f1(preds: PredictionSet, gold: Corpus) -> float:
    """Strict micro-averaged F1 (excluded documents count as misses)."""
    return evaluate_predictions(preds, gold).micro_f1


def per_class_f1(preds: PredictionSet, gold: Corpus) -> dict[str, float]:
    """One-vs-rest F1 per class over the scored documents.

    A class with neither gold nor predicted members gets F1 0 and is
    flagged in the full report, keeping per-class tables total.
    """
    return evaluate_predictions(preds, gold).per_class_f1


# ---------------------------------------------------------------------------
# Kendall's tau


def _tie_stats(values: np.ndarray) -> tuple[float, float, float]:
    # Returns (sum t(t-1)/2, sum t(t-1)(t-5)-style terms) used by the
    # tie-corrected variance: T = sum t(t-1)/2, vt = sum t(t-1)(2t+5),
    # t3 = sum t(t-1)(t-2).
    _, counts = np.unique(values, return_counts=True)
    t = counts.astype(np.float64)
    return (
        float(np.sum(t * (t - 1) / 2)),
        float(np.sum(t * (t - 1) * (2 * t + 5))),
        float(np.sum(t * (t - 1) * (t - 2))),
    )


def _s_statistic(x: np.ndarray, y: np.ndarray) -> float:
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    return float(np.sum(np.triu(dx * dy, k=1)))


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    """Tau-b rank correlation with a two-sided significance test.

    The p-value uses the normal approximation with the standard
    tie-corrected variance of the S statistic; for n <= 8 without ties it
    is the exact permutation p-value. Constant inputs have undefined tau
    and raise.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or xa.shape != ya.shape:
        raise ValueError("x and y must be 1-d sequences of equal length")
    n = xa.size
    if n < 2:
        raise ValueError("need at least two observations")
    if np.all(xa == xa[0]) or np.all(ya == ya[0]):
        raise DegenerateDataError("tau is undefined when one variable is constant")

    s = _s_statistic(xa, ya)
    n0 = n * (n - 1) / 2
    tx, vtx, t3x = _tie_stats(xa)
    ty, vty, t3y = _tie_stats(ya)
    tau = s / math.sqrt((n0 - tx) * (n0 - ty))
    has_ties = tx > 0 or ty > 0

    if not has_ties and n <= _EXACT_P_MAX_N:
        p = _exact_permutation_p(xa, ya, abs(s))
    else:
        v0 = n * (n - 1) * (2 * n + 5)
        var_s = (v0 - vtx - vty) / 18.0
        if has_ties:
            var_s += (2 * tx * ty) / (n * (n - 1)) + (t3x * t3y) / (
                9.0 * n * (n - 1) * (n - 2)
            )
        z = s / math.sqrt(var_s)
        p = math.erfc(abs(z) / math.sqrt(2.0))
    return CorrelationResult(tau=float(tau), p_value=float(min(p, 1.0)), n=n, tie_corrected=has_ties)


def _exact_permutation_p(x: np.ndarray, y: np.ndarray, s_abs: float) -> float:
    hits = 0
    total = 0
    for perm in itertools.permutations(range(x.size)):
        total += 1
        if abs(_s_statistic(x, y[list(perm)])) >= s_abs:
            hits += 1
    return hits / total


# ---------------------------------------------------------------------------
# Length analysis


def avg_doc_words_per_class(corpus: Corpus) -> dict[str, float]:
    """Mean whitespace-word count of each class's documents."""
    totals: dict[str, list[int]] = {c: [] for c in corpus.class_names}
    for doc in corpus:
        if doc.gold_class is not None:
            totals[doc.gold_class].append(count_words(doc.text))
    out: dict[str, float] = {}
    for c in sorted(totals):
        if not totals[c]:
            raise DegenerateDataError(f"class {c!r} has no documents")
        out[c] = float(np.mean(totals[c]))
    return out


def _normalize_groups(values: Mapping) -> dict[str, dict[str, float]]:
    if values and all(isinstance(v, Mapping) for v in values.values()):
        return {str(d): {str(c): float(x) for c, x in inner.items()} for d, inner in values.items()}
    return {"": {str(c): float(x) for c, x in values.items()}}


def correlate_length_vs_f1(
    per_class_f1: Mapping, per_class_lengths: Mapping
) -> CorrelationResult:
    """Kendall's tau between class-average document length and class F1.

    Accepts single-dataset mappings ``{class: value}`` or pooled
    ``{dataset: {class: value}}`` mappings; class keys must match between
    the two inputs within every dataset.
    """
    f1_groups = _normalize_groups(per_class_f1)
    len_groups = _normalize_groups(per_class_lengths)
    if set(f1_groups) != set(len_groups):
        raise ConsistencyError(
            f"dataset keys differ: {sorted(set(f1_groups) ^ set(len_groups))}"
        )
    xs: list[float] = []
    ys: list[float] = []
    for dataset in sorted(f1_groups):
        f1s, lens = f1_groups[dataset], len_groups[dataset]
        if set(f1s) != set(lens):
            mismatch = sorted(set(f1s) ^ set(lens))
            raise ConsistencyError(f"class keys differ in {dataset or 'input'}: {mismatch}")
        for c in sorted(f1s):
            xs.append(lens[c])
            ys.append(f1s[c])
    return kendall_tau(xs, ys)


# ---------------------------------------------------------------------------
# Import / render


def import_predictions(path: str | Path, class_names: Sequence[str] | None = None) -> PredictionSet:
    """Read predictions from the native JSONL format or an id,class CSV.

    CSV imports carry no scores. With ``class_names`` given, unknown
    predicted classes are an error.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    try:
        header = json.loads(first)
        is_native = isinstance(header, dict) and "method" in header
    except json.JSONDecodeError:
        is_native = False
    preds = _import_native(path) if is_native else _import_csv(path)
    if class_names is not None:
        known = set(class_names)
        for i, p in enumerate(preds.predicted):
            if p not in known:
                raise ConsistencyError(
                    f"{path}: record {i}: unknown class {p!r} (known: {sorted(known)})"
                )
    return preds


def _import_native(path: Path) -> PredictionSet:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        ids: list[str] = []
        predicted: list[str] = []
        winning: list[float | None] = []
        rows: list[dict[str, float] | None] = []
        for index, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputFormatError(f"{path}: record {index}: invalid JSON: {exc}") from exc
            if "id" not in rec or "predicted" not in rec:
                raise InputFormatError(f"{path}: record {index}: missing 'id'/'predicted'")
            ids.append(str(rec["id"]))
            predicted.append(str(rec["predicted"]))
            winning.append(rec.get("score"))
            rows.append(rec.get("scores"))
    class_names = sorted({c for r in rows if r for c in r} | set(predicted))
    scores = None
    if rows and all(r is not None for r in rows):
        scores = np.asarray(
            [[r.get(c, -1.0) for c in class_names] for r in rows], dtype=np.float64
        )
    return PredictionSet(
        method=str(header.get("method", "")),
        engine=str(header.get("engine", "")),
        config_fingerprint=str(header.get("config_fingerprint", "")),
        class_names=class_names,
        ids=ids,
        predicted=predicted,
        scores=scores,
        winning=winning,
    )


def _import_csv(path: Path) -> PredictionSet:
    ids: list[str] = []
    predicted: list[str] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for index, row in enumerate(reader):
            if not row:
                continue
            if len(row) < 2:
                raise InputFormatError(f"{path}:{index + 1}: expected id,class columns")
            if index == 0 and [c.strip().lower() for c in row[:2]] == ["id", "class"]:
                continue
            ids.append(row[0].strip())
            predicted.append(row[1].strip())
    return PredictionSet(
        method="imported",
        engine="external",
        config_fingerprint="",
        class_names=sorted(set(predicted)),
        ids=ids,
        predicted=predicted,
        scores=None,
    )


def render_report(report: EvalReport) -> str:
    """Aligned, human-readable table for standard output."""
    lines = []
    title = " / ".join(s for s in (report.dataset, report.engine, report.method) if s)
    if title:
        lines.append(title)
    lines.append(f"micro-F1 (strict):      {report.micro_f1:.4f}")
    lines.append(f"micro-F1 (scored only): {report.micro_f1_scored_only:.4f}")
    lines.append(f"documents scored:       {report.n_scored}")
    lines.append(f"documents excluded:     {report.n_excluded}")
    width = max((len(c) for c in report.per_class_f1), default=5)
    lines.append(f"{'class'.ljust(width)}  F1")
    for c, f1 in sorted(report.per_class_f1.items()):
        flag = "  (empty)" if c in report.empty_classes else ""
        lines.append(f"{c.ljust(width)}  {f1:.4f}{flag}")
    return "\n".join(lines)


def write_per_class_csv(report: EvalReport, path: str | Path) -> None:
    """Plot-ready per-class F1 CSV (dataset, class, f1)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "class", "f1"])
        for c, f1 in sorted(report.per_class_f1.items()):
            writer.writerow([report.dataset, c, f1])
