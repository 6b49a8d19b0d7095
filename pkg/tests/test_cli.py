"""End-to-end CLI behavior: subcommands, exit codes, reproducibility."""

import json

import numpy as np
import pytest

from labelsim.cli import EXIT_CONSISTENCY, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, main
from labelsim.corpus import Corpus, Document, write_corpus


@pytest.fixture
def toy_dataset(tmp_path):
    """A small two-class corpus with disjoint vocabularies, plus spec file."""
    rng = np.random.default_rng(19)
    docs = []
    for i in range(20):
        a = " ".join(rng.choice(["cat", "dog", "pet"], size=6))
        h = " ".join(rng.choice(["cpu", "ram", "chip"], size=6))
        docs.append(Document(f"a{i}", a, "animals"))
        docs.append(Document(f"h{i}", h, "hardware"))
    corpus = Corpus(
        name="toy", documents=tuple(docs), class_names=frozenset({"animals", "hardware"})
    )
    corpus_path = tmp_path / "toy.jsonl"
    write_corpus(corpus, corpus_path)
    spec_path = tmp_path / "specs.json"
    spec_path.write_text(
        json.dumps(
            [
                {"name": "animals", "keywords": ["pet"]},
                {"name": "hardware", "keywords": ["chip"]},
            ]
        )
    )
    return corpus_path, spec_path


class TestIngest:
    def _manifest(self, tmp_path, expected_total=4):
        (tmp_path / "train.csv").write_text(
            "label,text\n1,alpha beta\n1,gamma delta\n2,eps zeta\n"
        )
        (tmp_path / "test.csv").write_text("label,text\n2,eta theta\n")
        manifest = {
            "name": "toy",
            "format": "csv",
            "train_path": "train.csv",
            "test_path": "test.csv",
            "columns": {"text": "text", "class": "label"},
            "label_map": {"1": "A", "2": "B"},
            "expected_totals": {"total": expected_total},
        }
        mpath = tmp_path / "toy-manifest.json"
        mpath.write_text(json.dumps(manifest))
        return mpath

    def test_ok(self, tmp_path, capsys):
        mpath = self._manifest(tmp_path)
        out = tmp_path / "corpus.jsonl"
        code = main(
            ["ingest", "--manifest", str(mpath), "--data-dir", str(tmp_path), "--out", str(out)]
        )
        assert code == EXIT_OK
        assert out.exists()
        report = json.loads(out.with_suffix(".report.json").read_text())
        assert report["classes"]["A"]["total"] == 2
        assert "wrote 4 documents" in capsys.readouterr().out

    def test_count_mismatch_exits_3(self, tmp_path, capsys):
        mpath = self._manifest(tmp_path, expected_total=99)
        code = main(["ingest", "--manifest", str(mpath), "--data-dir", str(tmp_path)])
        assert code == EXIT_CONSISTENCY

    def test_missing_file_exits_2(self, tmp_path):
        mpath = self._manifest(tmp_path)
        code = main(["ingest", "--manifest", str(mpath), "--data-dir", str(tmp_path / "no")])
        assert code == EXIT_INPUT

    def test_missing_manifest_exits_2(self, tmp_path):
        assert main(["ingest", "--manifest", str(tmp_path / "none.yaml")]) == EXIT_INPUT


class TestSplit:
    def test_writes_paragraphs(self, tmp_path, toy_dataset):
        corpus_path, _ = toy_dataset
        out = tmp_path / "paras.jsonl"
        code = main(
            ["split", "--corpus", str(corpus_path), "--max-seq-len", "8", "--out", str(out)]
        )
        assert code == EXIT_OK
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert records[0]["id"].endswith("#0")
        assert records[0]["parent"] == records[0]["id"].split("#")[0]


class TestTrainAndFit:
    def test_train_w2v(self, tmp_path, toy_dataset):
        corpus_path, _ = toy_dataset
        out = tmp_path / "wv.jsonl"
        code = main(
            [
                "train-w2v", "--corpus", str(corpus_path), "--dim", "8",
                "--epochs", "2", "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        from labelsim.vectors import load_embedding_file

        matrix = load_embedding_file(out)
        assert matrix.kind == "word"
        assert matrix.dim == 8
        assert set(matrix.ids) == {"cat", "dog", "pet", "cpu", "ram", "chip"}

    def test_fit_lsa(self, tmp_path, toy_dataset):
        corpus_path, _ = toy_dataset
        out = tmp_path / "lsa.json"
        code = main(
            ["fit-lsa", "--corpus", str(corpus_path), "--n-concepts", "2", "--out", str(out)]
        )
        assert code == EXIT_OK
        from labelsim.lsa import LsaModel

        assert LsaModel.load(out).n_concepts == 2

    def test_fit_lsa_too_many_concepts_exits_4(self, tmp_path, toy_dataset):
        corpus_path, _ = toy_dataset
        code = main(["fit-lsa", "--corpus", str(corpus_path), "--n-concepts", "900"])
        assert code == EXIT_NUMERIC


class TestClassify:
    def test_lsa_run_with_config_file(self, tmp_path, toy_dataset):
        corpus_path, spec_path = toy_dataset
        cfg = {
            "corpus": str(corpus_path),
            "class_spec": str(spec_path),
            "engine": "lsa",
            "method": "centroid-baseline",
            "seed": 3,
        }
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        out = tmp_path / "preds.jsonl"
        code = main(["classify", "--config", str(cfg_path), "--out", str(out)])
        assert code == EXIT_OK
        header = json.loads(out.read_text().splitlines()[0])
        assert header["method"] == "centroid-baseline"
        assert header["engine"] == "lsa"
        assert header["config_fingerprint"]

    def test_flag_overrides_config(self, tmp_path, toy_dataset):
        corpus_path, spec_path = toy_dataset
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(
            json.dumps({"corpus": str(corpus_path), "class_spec": str(spec_path), "engine": "lsa"})
        )
        out = tmp_path / "preds.jsonl"
        code = main(
            [
                "classify", "--config", str(cfg_path), "--engine", "word2vec",
                "--method", "label-vector", "--k", "5",
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        header = json.loads(out.read_text().splitlines()[0])
        assert header["engine"] == "word2vec"
        assert header["method"] == "label-vector"

    def test_deterministic_rerun_byte_identical(self, tmp_path, toy_dataset):
        corpus_path, spec_path = toy_dataset
        args = [
            "classify", "--corpus", str(corpus_path), "--class-spec", str(spec_path),
            "--engine", "word2vec", "--method", "centroid-baseline", "--seed", "11",
        ]
        out1, out2 = tmp_path / "p1.jsonl", tmp_path / "p2.jsonl"
        assert main(args + ["--out", str(out1)]) == EXIT_OK
        assert main(args + ["--out", str(out2)]) == EXIT_OK
        assert out1.read_bytes() == out2.read_bytes()

    def test_missing_corpus_exits_2(self, tmp_path, toy_dataset):
        _, spec_path = toy_dataset
        code = main(
            [
                "classify", "--corpus", str(tmp_path / "missing.jsonl"),
                "--class-spec", str(spec_path), "--engine", "lsa",
            ]
        )
        assert code == EXIT_INPUT

    def test_imported_engine_via_files(self, tmp_path, toy_dataset):
        corpus_path, spec_path = toy_dataset
        from labelsim.corpus import load_corpus
        from labelsim.vectors import EmbeddingMatrix, write_embedding_file

        corpus = load_corpus(corpus_path, "jsonl")
        rng = np.random.default_rng(7)
        ids, parents, vecs = [], [], []
        for d in corpus:
            base = [1.0, 0.0] if d.gold_class == "animals" else [0.0, 1.0]
            ids.append(f"{d.id}#0")
            parents.append(d.id)
            vecs.append(np.asarray(base) + 0.05 * rng.normal(size=2))
        para = EmbeddingMatrix(ids=ids, vectors=np.vstack(vecs), kind="paragraph", parents=parents)
        kw = EmbeddingMatrix(
            ids=["pet", "chip"],
            vectors=np.array([[1.0, 0.1], [0.1, 1.0]]),
            kind="keyword",
            parents=["animals", "hardware"],
        )
        para_path, kw_path = tmp_path / "para.jsonl", tmp_path / "kw.jsonl"
        write_embedding_file(para, para_path)
        write_embedding_file(kw, kw_path)
        out = tmp_path / "preds.jsonl"
        code = main(
            [
                "classify", "--corpus", str(corpus_path), "--class-spec", str(spec_path),
                "--engine", "imported-embeddings", "--method", "label-vector",
                "--k", "10",
                "--paragraph-embeddings", str(para_path),
                "--keyword-embeddings", str(kw_path),
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        records = [json.loads(l) for l in out.read_text().splitlines()[1:]]
        gold = {d.id: d.gold_class for d in corpus}
        acc = np.mean([gold[r["id"]] == r["predicted"] for r in records])
        assert acc == 1.0


class TestEvalAndCorrelate:
    def _run_eval(self, tmp_path, toy_dataset, preds_lines):
        corpus_path, _ = toy_dataset
        preds_path = tmp_path / "preds.jsonl"
        preds_path.write_text("\n".join(json.dumps(l) for l in preds_lines) + "\n")
        out = tmp_path / "report.json"
        code = main(
            ["eval", "--predictions", str(preds_path), "--corpus", str(corpus_path), "--out", str(out)]
        )
        return code, out

    def test_perfect_predictions(self, tmp_path, toy_dataset, capsys):
        corpus_path, _ = toy_dataset
        from labelsim.corpus import load_corpus

        corpus = load_corpus(corpus_path, "jsonl")
        lines = [{"method": "m", "engine": "e", "config_fingerprint": "f"}]
        for d in corpus:
            lines.append({"id": d.id, "predicted": d.gold_class, "score": 1.0, "scores": None})
        code, out = self._run_eval(tmp_path, toy_dataset, lines)
        assert code == EXIT_OK
        report = json.loads(out.read_text())
        assert report["micro_f1"] == 1.0
        assert "micro-F1 (strict):      1.0000" in capsys.readouterr().out

    def test_unknown_ids_exit_3(self, tmp_path, toy_dataset):
        lines = [
            {"method": "m", "engine": "e", "config_fingerprint": "f"},
            {"id": "ghost", "predicted": "animals", "score": None, "scores": None},
        ]
        code, _ = self._run_eval(tmp_path, toy_dataset, lines)
        assert code == EXIT_CONSISTENCY

    def test_correlate(self, tmp_path, capsys):
        docs = (
            Document("x0", "one two", "short"),
            Document("x1", "one two three four", "medium"),
            Document("x2", "one two three four five six", "long"),
        )
        corpus = Corpus(
            name="lengths", documents=docs, class_names=frozenset({"short", "medium", "long"})
        )
        corpus_path = tmp_path / "lengths.jsonl"
        write_corpus(corpus, corpus_path)
        report = {
            "dataset": "lengths",
            "per_class_f1": {"short": 0.2, "medium": 0.5, "long": 0.9},
        }
        rpath = tmp_path / "r.json"
        rpath.write_text(json.dumps(report))
        out = tmp_path / "corr.json"
        code = main(
            [
                "correlate", "--reports", str(rpath), "--corpora", str(corpus_path),
                "--out", str(out),
            ]
        )
        assert code == EXIT_OK
        result = json.loads(out.read_text())
        assert result["n"] == 3
        assert result["tau"] == 1.0

    def test_correlate_pools_four_datasets(self, tmp_path):
        rng = np.random.default_rng(151)
        report_paths, corpus_paths = [], []
        for dataset, n_classes in (("news", 20), ("ag", 4), ("yahoo", 10), ("medical", 5)):
            classes = [f"{dataset}-c{i}" for i in range(n_classes)]
            docs = []
            for i, c in enumerate(classes):
                text = " ".join(["word"] * int(rng.integers(2, 50)))
                docs.append(Document(f"{dataset}-d{i}", text, c))
            corpus = Corpus(name=dataset, documents=tuple(docs), class_names=frozenset(classes))
            cpath = tmp_path / f"{dataset}.jsonl"
            write_corpus(corpus, cpath)
            rpath = tmp_path / f"{dataset}-report.json"
            rpath.write_text(
                json.dumps(
                    {"dataset": dataset, "per_class_f1": {c: float(rng.random()) for c in classes}}
                )
            )
            report_paths.append(str(rpath))
            corpus_paths.append(str(cpath))
        out = tmp_path / "corr.json"
        code = main(
            ["correlate", "--reports", *report_paths, "--corpora", *corpus_paths, "--out", str(out)]
        )
        assert code == EXIT_OK
        assert json.loads(out.read_text())["n"] == 39

    def test_correlate_arity_mismatch(self, tmp_path, toy_dataset):
        corpus_path, _ = toy_dataset
        code = main(
            ["correlate", "--reports", "a.json", "b.json", "--corpora", str(corpus_path)]
        )
        assert code == EXIT_CONSISTENCY


class TestReport:
    def test_renders_eval_report(self, tmp_path, capsys):
        payload = {
            "micro_f1": 0.75,
            "micro_f1_scored_only": 0.8,
            "per_class_f1": {"a": 0.7, "b": 0.8},
            "n_scored": 8,
            "n_excluded": 2,
            "dataset": "toy",
        }
        rpath = tmp_path / "r.json"
        rpath.write_text(json.dumps(payload))
        csv_out = tmp_path / "per_class.csv"
        code = main(["report", str(rpath), "--per-class-csv", str(csv_out)])
        assert code == EXIT_OK
        assert "0.7500" in capsys.readouterr().out
        assert csv_out.read_text().splitlines()[0] == "dataset,class,f1"

    def test_renders_correlation(self, tmp_path, capsys):
        rpath = tmp_path / "c.json"
        rpath.write_text(json.dumps({"tau": -0.16, "p_value": 0.16, "n": 39}))
        assert main(["report", str(rpath)]) == EXIT_OK
        assert "tau=-0.1600" in capsys.readouterr().out
