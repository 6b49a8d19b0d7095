"""Skip-gram training and word-averaging contracts."""

import itertools

import numpy as np
import pytest

from labelsim.corpus import Corpus, Document
from labelsim.errors import DegenerateDataError
from labelsim.vectors import EmbeddingMatrix, cosine
from labelsim.word2vec import (
    SkipGramVectorizer,
    Word2VecConfig,
    WordEmbeddingTable,
    doc_vector_avg_words,
    train_word2vec,
)

ANIMAL_WORDS = ["cat", "dog", "pet"]
HARDWARE_WORDS = ["cpu", "ram", "chip"]


def two_topic_corpus(n_per_topic=60, words_per_doc=8, seed=123):
    """Interleaved documents drawn from two disjoint vocabularies."""
    rng = np.random.default_rng(seed)
    docs = []
    for i in range(n_per_topic):
        for label, vocab in (("animals", ANIMAL_WORDS), ("hardware", HARDWARE_WORDS)):
            words = rng.choice(vocab, size=words_per_doc)
            docs.append(
                Document(id=f"{label}-{i}", text=" ".join(words), gold_class=label)
            )
    return Corpus(
        name="two-topic", documents=tuple(docs), class_names=frozenset({"animals", "hardware"})
    )


def group_cosines(table, group_a, group_b):
    intra = [
        cosine(table.vector(u), table.vector(v))
        for group in (group_a, group_b)
        for u, v in itertools.combinations(group, 2)
    ]
    inter = [
        cosine(table.vector(u), table.vector(v))
        for u in group_a
        for v in group_b
    ]
    return float(np.mean(intra)), float(np.mean(inter))


SMALL_CFG = Word2VecConfig(dim=16, epochs=20, seed=7, deterministic=True)


class TestTraining:
    def test_two_topic_separation(self):
        table = train_word2vec(two_topic_corpus(), SMALL_CFG)
        intra, inter = group_cosines(table, ANIMAL_WORDS, HARDWARE_WORDS)
        assert intra > inter

    def test_single_repeated_word(self):
        corpus = Corpus(name="mono", documents=(Document("d", "word word word word"),))
        table = train_word2vec(corpus, Word2VecConfig(dim=4, epochs=2))
        assert len(table.vectors) == 1
        assert "word" in table

    def test_deterministic_mode_bitwise(self):
        corpus = two_topic_corpus(n_per_topic=10)
        t1 = train_word2vec(corpus, SMALL_CFG)
        t2 = train_word2vec(corpus, SMALL_CFG)
        assert t1.vectors.ids == t2.vectors.ids
        assert np.array_equal(t1.vectors.vectors, t2.vectors.vectors)

    def test_seed_changes_vectors(self):
        corpus = two_topic_corpus(n_per_topic=10)
        t1 = train_word2vec(corpus, SMALL_CFG)
        t2 = train_word2vec(corpus, Word2VecConfig(dim=16, epochs=20, seed=8))
        assert not np.array_equal(t1.vectors.vectors, t2.vectors.vectors)

    def test_empty_vocabulary(self):
        corpus = Corpus(name="x", documents=(Document("d", "a b c"),))  # all dropped
        with pytest.raises(DegenerateDataError):
            train_word2vec(corpus, SMALL_CFG)

    def test_min_count_filters(self):
        corpus = Corpus(
            name="x",
            documents=(Document("d", "common common common rare"),),
        )
        table = train_word2vec(corpus, Word2VecConfig(dim=4, epochs=1, min_count=2))
        assert "common" in table
        assert "rare" not in table

    def test_nondeterministic_workers_run(self):
        corpus = two_topic_corpus(n_per_topic=8)
        cfg = Word2VecConfig(dim=8, epochs=2, deterministic=False, workers=2, seed=1)
        table = train_word2vec(corpus, cfg)
        assert len(table.vectors) == 6


class TestDocAveraging:
    @pytest.fixture
    def toy_table(self):
        matrix = EmbeddingMatrix(
            ids=["cat", "dog"],
            vectors=np.array([[1.0, 0.0], [0.0, 1.0]], dtype=np.float32),
            kind="word",
            source="handmade",
        )
        return WordEmbeddingTable(vectors=matrix, config=Word2VecConfig(dim=2))

    def test_mean(self, toy_table):
        assert np.allclose(doc_vector_avg_words(toy_table, "cat dog"), [0.5, 0.5])

    def test_repetition_identity(self, toy_table):
        assert np.allclose(doc_vector_avg_words(toy_table, "cat cat"), [1.0, 0.0])

    def test_oov_skipped(self, toy_table):
        assert np.allclose(doc_vector_avg_words(toy_table, "cat zebra"), [1.0, 0.0])

    def test_all_oov_rejected(self, toy_table):
        with pytest.raises(DegenerateDataError):
            doc_vector_avg_words(toy_table, Document("d9", "zebra lion"))


class TestSkipGramVectorizer:
    def test_fit_transform_shapes(self):
        texts = [d.text for d in two_topic_corpus(n_per_topic=6)]
        vec = SkipGramVectorizer(dim=8, epochs=3, seed=4).fit(texts)
        out = vec.transform(texts[:5])
        assert out.shape == (5, 8)

    def test_degenerate_row_raises(self):
        vec = SkipGramVectorizer(dim=4, epochs=1).fit(["cat dog cat", "dog cat"])
        with pytest.raises(DegenerateDataError):
            vec.transform(["qq zz"])

    def test_sklearn_clone(self):
        from sklearn.base import clone

        vec = SkipGramVectorizer(dim=32, window=3, seed=5)
        params = clone(vec).get_params()
        assert params["dim"] == 32 and params["window"] == 3 and params["seed"] == 5
