"""Similarity-based unsupervised text classification from label descriptions.

Documents and textual class descriptions are embedded in a common vector
space (in-repo LSA or skip-gram engines, or imported transformer
embeddings); classification assigns each document to the class whose
representation — keyword centroid or candidate-document label vector —
it is most cosine-similar to.
"""

from .corpus import (
    ClassSpec,
    Corpus,
    Document,
    ParagraphSet,
    bundled_spec_path,
    concat_splits,
    filter_short,
    load_class_specs,
    load_corpus,
    sentence_tokenize,
    split_document,
)
from .vectors import (
    EmbeddingMatrix,
    cosine,
    doc_vector_avg_paragraphs,
    load_embedding_file,
    mean_vector,
    write_embedding_file,
)
from .lsa import LsaModel, LsaVectorizer, fit_lsa, lsa_project
from .word2vec import (
    SkipGramVectorizer,
    Word2VecConfig,
    WordEmbeddingTable,
    doc_vector_avg_words,
    train_word2vec,
)
from .classify import (
    ClassVector,
    KeywordCentroidClassifier,
    LabelVector,
    LabelVectorClassifier,
    PipelineConfig,
    PredictionSet,
    classify_by_centroid,
    classify_by_label_vectors,
    clean_candidates,
    compute_label_vectors,
    keyword_class_vectors,
    run_pipeline,
    select_candidates,
    write_predictions,
)
from .evaluation import (
    CorrelationResult,
    EvalReport,
    avg_doc_words_per_class,
    correlate_length_vs_f1,
    evaluate_predictions,
    import_predictions,
    kendall_tau,
    micro_f1,
    per_class_f1,
)

__version__ = "0.1.0"

__all__ = [
    "ClassSpec", "Corpus", "Document", "ParagraphSet",
    "bundled_spec_path", "concat_splits", "filter_short", "load_class_specs",
    "load_corpus", "sentence_tokenize", "split_document",
    "EmbeddingMatrix", "cosine", "doc_vector_avg_paragraphs",
    "load_embedding_file", "mean_vector", "write_embedding_file",
    "LsaModel", "LsaVectorizer", "fit_lsa", "lsa_project",
    "SkipGramVectorizer", "Word2VecConfig", "WordEmbeddingTable",
    "doc_vector_avg_words", "train_word2vec",
    "ClassVector", "KeywordCentroidClassifier", "LabelVector",
    "LabelVectorClassifier", "PipelineConfig", "PredictionSet",
    "classify_by_centroid", "classify_by_label_vectors", "clean_candidates",
    "compute_label_vectors", "keyword_class_vectors", "run_pipeline",
    "select_candidates", "write_predictions",
    "CorrelationResult", "EvalReport", "avg_doc_words_per_class",
    "correlate_length_vs_f1", "evaluate_predictions", "import_predictions",
    "kendall_tau", "micro_f1", "per_class_f1",
]
