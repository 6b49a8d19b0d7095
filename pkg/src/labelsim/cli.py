"""Command-line interface: reproducible, config-driven classification runs.

Subcommands: ``ingest``, ``split``, ``train-w2v``, ``fit-lsa``,
``classify``, ``eval``, ``correlate``, ``report``. Exit codes: 0 success,
2 input/IO error, 3 consistency error, 4 numeric or degenerate-data
error.

``classify`` reads a declarative run config (YAML or JSON) which any
command-line flag can override; every output file embeds the fingerprint
of the canonicalized config, and a rerun with an unchanged config in
deterministic mode reproduces output files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import corpus as corpus_mod
from .classify import (
    PipelineConfig,
    config_fingerprint,
    run_pipeline,
    write_predictions,
)
from .errors import ConsistencyError, DegenerateDataError, InputFormatError, LabelsimError
from .evaluation import (
    correlate_length_vs_f1,
    avg_doc_words_per_class,
    evaluate_predictions,
    import_predictions,
    render_report,
    write_per_class_csv,
)
from .lsa import fit_lsa
from .vectors import load_embedding_file, write_embedding_file
from .word2vec import Word2VecConfig, train_word2vec

DATA_DIR_ENV = "LABELSIM_DATA_DIR"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONSISTENCY = 3
EXIT_NUMERIC = 4


@dataclass
class RunConfig:
    """A declarative classification run (the ``classify`` subcommand)."""

    corpus: str = ""
    class_spec: str = ""
    engine: str = "lsa"
    method: str = "centroid-baseline"
    k: int = 100
    min_similarity: float | None = None
    clean_policy: str = "none"
    max_seq_len: int = 512
    n_concepts: int | None = None
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 10
    min_count: int = 1
    learning_rate: float = 0.025
    seed: int = 0
    deterministic: bool = True
    jobs: int = 1
    paragraph_embeddings: str | None = None
    keyword_embeddings: str | None = None
    document_embeddings: str | None = None
    output_dir: str = "."
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            if path.suffix.lower() in (".yaml", ".yml"):
                import yaml

                data = yaml.safe_load(fh) or {}
            else:
                data = json.load(fh)
        if not isinstance(data, dict):
            raise InputFormatError(f"{path}: run config must be a mapping")
        cfg = cls()
        known = set(cfg.__dataclass_fields__) - {"extras"}
        for key, value in data.items():
            k = key.replace("-", "_")
            if k in known:
                setattr(cfg, k, value)
            else:
                cfg.extras[key] = value
        return cfg

    def canonical(self) -> dict:
        data = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "extras"}
        data.update(self.extras)
        return data

    def fingerprint(self) -> str:
        return config_fingerprint(self.canonical())

    def pipeline_config(self) -> PipelineConfig:
        policy, alpha = ("none", 1.0)
        if self.clean_policy != "none":
            from .classify import parse_clean_policy

            policy, alpha = parse_clean_policy(self.clean_policy)
        return PipelineConfig(
            k=self.k,
            min_similarity=self.min_similarity,
            clean_policy=policy,
            clean_alpha=alpha,
            n_concepts=self.n_concepts,
            word2vec=Word2VecConfig(
                dim=self.dim,
                window=self.window,
                negatives=self.negatives,
                epochs=self.epochs,
                min_count=self.min_count,
                learning_rate=self.learning_rate,
                seed=self.seed,
                deterministic=self.deterministic,
                workers=self.jobs,
            ),
            seed=self.seed,
            deterministic=self.deterministic,
        )


def _data_dir(args) -> Path:
    if getattr(args, "data_dir", None):
        return Path(args.data_dir)
    return Path(os.environ.get(DATA_DIR_ENV, "."))


def _resolve_spec_path(spec: str) -> Path:
    p = Path(spec)
    if p.exists():
        return p
    return corpus_mod.bundled_spec_path(spec)


def _load_corpus_file(path: str | Path) -> corpus_mod.Corpus:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"corpus file not found: {p}")
    return corpus_mod.load_corpus(p, "jsonl")


# ---------------------------------------------------------------------------
# Subcommand implementations


def _cmd_ingest(args) -> int:
    manifest_path = Path(args.manifest)
    if not manifest_path.exists():
        bundled = Path(__file__).parent / "data" / "manifests" / f"{args.manifest}.yaml"
        if bundled.exists():
            manifest_path = bundled
        else:
            raise FileNotFoundError(f"manifest not found: {args.manifest}")
    manifest = corpus_mod.load_manifest(manifest_path)
    combined, report = corpus_mod.ingest_manifest(manifest, _data_dir(args))
    out = Path(args.out or f"{manifest.name}.jsonl")
    corpus_mod.write_corpus(combined, out)
    report["corpus_file"] = str(out)
    report_path = out.with_suffix(".report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    print(f"wrote {len(combined)} documents to {out}")
    print(f"validation report: {report_path}")
    if report["n_removed_short"]:
        print(f"removed {report['n_removed_short']} too-short documents")
    return EXIT_OK


def _cmd_split(args) -> int:
    corpus = _load_corpus_file(args.corpus)
    out = Path(args.out or "paragraphs.jsonl")
    n = 0
    with open(out, "w", encoding="utf-8") as fh:
        for doc in corpus:
            pset = corpus_mod.split_document(doc, args.max_seq_len)
            for i, text in enumerate(pset.paragraphs):
                rec = {"id": f"{doc.id}#{i}", "parent": doc.id, "text": text}
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
                n += 1
    print(f"wrote {n} paragraphs to {out}")
    return EXIT_OK


def _cmd_train_w2v(args) -> int:
    corpus = _load_corpus_file(args.corpus)
    cfg = Word2VecConfig(
        dim=args.dim,
        window=args.window,
        negatives=args.negatives,
        epochs=args.epochs,
        min_count=args.min_count,
        learning_rate=args.learning_rate,
        seed=args.seed,
        deterministic=not args.nondeterministic,
        workers=args.jobs,
    )
    table = train_word2vec(corpus, cfg)
    out = Path(args.out or "word_vectors.jsonl")
    write_embedding_file(table.vectors, out, format=args.format)
    print(f"trained {len(table.vectors)} word vectors (dim={cfg.dim}) -> {out}")
    return EXIT_OK


def _cmd_fit_lsa(args) -> int:
    corpus = _load_corpus_file(args.corpus)
    model = fit_lsa(corpus, args.n_concepts, seed=args.seed)
    out = Path(args.out or "lsa_model.json")
    model.save(out)
    print(f"fitted {args.n_concepts} concepts over {len(model.terms)} terms -> {out}")
    return EXIT_OK


def _cmd_classify(args) -> int:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {
        "corpus": args.corpus,
        "class_spec": args.class_spec,
        "engine": args.engine,
        "method": args.method,
        "k": args.k,
        "min_similarity": args.min_similarity,
        "clean_policy": args.clean_policy,
        "n_concepts": args.n_concepts,
        "seed": args.seed,
        "jobs": args.jobs,
        "paragraph_embeddings": args.paragraph_embeddings,
        "keyword_embeddings": args.keyword_embeddings,
        "document_embeddings": args.document_embeddings,
        "output_dir": args.output_dir,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    if args.nondeterministic:
        cfg.deterministic = False

    if not cfg.corpus:
        raise InputFormatError("no corpus given (config 'corpus' or --corpus)")
    if not cfg.class_spec:
        raise InputFormatError("no class spec given (config 'class_spec' or --class-spec)")

    corpus = _load_corpus_file(cfg.corpus)
    specs = corpus_mod.load_class_specs(_resolve_spec_path(cfg.class_spec))
    fingerprint = cfg.fingerprint()

    matrices = {}
    for name, attr in (
        ("paragraph_matrix", "paragraph_embeddings"),
        ("keyword_matrix", "keyword_embeddings"),
        ("document_matrix", "document_embeddings"),
    ):
        path = getattr(cfg, attr)
        if path:
            matrices[name] = load_embedding_file(path)

    preds = run_pipeline(
        corpus,
        specs,
        cfg.engine,
        cfg.method,
        cfg.pipeline_config(),
        fingerprint=fingerprint,
        **matrices,
    )
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = Path(args.out) if args.out else out_dir / f"predictions-{fingerprint}.jsonl"
    write_predictions(preds, out)
    print(f"classified {len(preds)} documents ({len(preds.excluded_ids)} excluded, "
          f"{preds.n_ties} ties) -> {out}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    corpus = _load_corpus_file(args.corpus)
    class_names = sorted(corpus.class_names)
    preds = import_predictions(args.predictions, class_names=class_names)
    report = evaluate_predictions(preds, corpus)
    out = Path(args.out or "eval_report.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
    print(render_report(report))
    print(f"report written to {out}")
    if args.per_class_csv:
        write_per_class_csv(report, args.per_class_csv)
    return EXIT_OK


def _cmd_correlate(args) -> int:
    if len(args.reports) != len(args.corpora):
        raise ConsistencyError(
            f"{len(args.reports)} reports but {len(args.corpora)} corpora"
        )
    f1s: dict[str, dict[str, float]] = {}
    lengths: dict[str, dict[str, float]] = {}
    for report_path, corpus_path in zip(args.reports, args.corpora):
        with open(report_path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if "per_class_f1" not in payload:
            raise InputFormatError(f"{report_path}: not an eval report (no per_class_f1)")
        corpus = _load_corpus_file(corpus_path)
        key = payload.get("dataset") or corpus.name
        f1s[key] = {str(c): float(v) for c, v in payload["per_class_f1"].items()}
        lengths[key] = avg_doc_words_per_class(corpus)
    result = correlate_length_vs_f1(f1s, lengths)
    out = Path(args.out or "correlation.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(result.to_json(), fh, indent=2, sort_keys=True)
    print(f"tau={result.tau:.4f}  p={result.p_value:.4f}  n={result.n}")
    print(f"correlation written to {out}")
    return EXIT_OK


def _cmd_report(args) -> int:
    for path in args.reports:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if "per_class_f1" in payload:
            from .evaluation import EvalReport

            report = EvalReport(
                micro_f1=payload["micro_f1"],
                micro_f1_scored_only=payload.get("micro_f1_scored_only", payload["micro_f1"]),
                per_class_f1=payload["per_class_f1"],
                confusion=payload.get("confusion", {}),
                n_scored=payload.get("n_scored", 0),
                n_excluded=payload.get("n_excluded", 0),
                empty_classes=payload.get("empty_classes", []),
                method=payload.get("method", ""),
                engine=payload.get("engine", ""),
                dataset=payload.get("dataset", ""),
            )
            print(render_report(report))
            if args.per_class_csv:
                write_per_class_csv(report, args.per_class_csv)
        elif "tau" in payload:
            print(f"tau={payload['tau']:.4f}  p={payload['p_value']:.4f}  n={payload['n']}")
        else:
            raise InputFormatError(f"{path}: not an eval or correlation report")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelsim",
        description="Similarity-based unsupervised text classification from label descriptions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, validate, and canonicalize a dataset")
    p.add_argument("--manifest", required=True, help="manifest file or bundled manifest name")
    p.add_argument("--data-dir", help=f"dataset root (default ${DATA_DIR_ENV} or .)")
    p.add_argument("--out", help="output corpus JSONL path")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("split", help="split a corpus into bounded paragraphs")
    p.add_argument("--corpus", required=True)
    p.add_argument("--max-seq-len", type=int, default=512)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train-w2v", help="train skip-gram word vectors")
    p.add_argument("--corpus", required=True)
    p.add_argument("--dim", type=int, default=300)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--learning-rate", type=float, default=0.025)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nondeterministic", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["jsonl", "packed"], default="jsonl")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_train_w2v)

    p = sub.add_parser("fit-lsa", help="fit an LSA concept space")
    p.add_argument("--corpus", required=True)
    p.add_argument("--n-concepts", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fit_lsa)

    p = sub.add_parser("classify", help="run a classification pipeline")
    p.add_argument("--config", help="run config file (YAML or JSON); flags override")
    p.add_argument("--corpus")
    p.add_argument("--class-spec", help="class-spec file or bundled spec name")
    p.add_argument("--engine", choices=["lsa", "word2vec", "imported-embeddings"])
    p.add_argument("--method", choices=["centroid-baseline", "label-vector"])
    p.add_argument("--k", type=int)
    p.add_argument("--min-similarity", type=float)
    p.add_argument("--clean-policy", help="none or sigma(alpha)")
    p.add_argument("--n-concepts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--nondeterministic", action="store_true")
    p.add_argument("--jobs", type=int)
    p.add_argument("--paragraph-embeddings")
    p.add_argument("--keyword-embeddings")
    p.add_argument("--document-embeddings")
    p.add_argument("--output-dir")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("eval", help="score predictions against a gold corpus")
    p.add_argument("--predictions", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.add_argument("--per-class-csv")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("correlate", help="class length vs F1 correlation over datasets")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--corpora", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser("report", help="render report files for reading")
    p.add_argument("reports", nargs="+")
    p.add_argument("--per-class-csv")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, OSError, InputFormatError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (DegenerateDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LabelsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
