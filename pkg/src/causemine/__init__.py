"""Causality mining over clinical text.

Extracts (subject, trigger, object, confidence) quads from sentences,
expands them through distributional and lexicon substitution, classifies
them with an ensemble of embedding models over binned vector stores,
grounds them in a medical concept vocabulary, and evolves the stores from
expert feedback.
"""
from .embed import (
    HashEmbeddingProvider,
    HttpEmbeddingProvider,
    PrecomputedFileProvider,
    WordVectorAverageProvider,
    cosine_similarity,
    make_provider,
)
from .ensemble import (
    EnsembleClassifier,
    EnsembleResult,
    ModelChannel,
    ModelVerdict,
    classify_single,
    intersection_degree,
)
from .evaluate import Confusion, Metrics, confusion, degree_report, metrics
from .errors import (
    AllTokensUnknownError,
    CauseMineError,
    ClassificationIncompleteError,
    ConfigError,
    DimensionMismatchError,
    EnrichmentIncompleteError,
    EvolveInProgressError,
    MalformedPretaggedError,
    NotFoundError,
    ProviderUnavailableError,
    StageOrderError,
    UndefinedSimilarityError,
    UnknownPhraseError,
)
from .extract import (
    NounPhrase,
    Quad,
    chunk_noun_phrases,
    extract_candidate_triples,
    extract_corpus,
    extract_quads,
    extract_training_quads,
    quad_id,
)
from .expand import (
    SynonymLexicon,
    build_expanded_set,
    dedupe_quads,
    expand_quad,
    filter_quads,
    top_k_similar,
)
from .feedback import Blocklist, EvolutionReport, VerdictRecord, apply_feedback
from .preprocess import (
    HeuristicTagger,
    HttpTagger,
    LemmaLexicon,
    PretaggedTagger,
    RawDocument,
    TaggedSentence,
    Token,
    normalize,
    pos_tag,
    preprocess_document,
    split_sentences,
    tokenize_and_lemmatize,
)
from .store import BinnedVectorStore, SearchHit, build_store

__version__ = "0.1.0"

__all__ = [
    "AllTokensUnknownError",
    "BinnedVectorStore",
    "Blocklist",
    "CauseMineError",
    "ClassificationIncompleteError",
    "ConfigError",
    "Confusion",
    "DimensionMismatchError",
    "EnrichmentIncompleteError",
    "EnsembleClassifier",
    "EnsembleResult",
    "EvolutionReport",
    "EvolveInProgressError",
    "HashEmbeddingProvider",
    "HeuristicTagger",
    "HttpEmbeddingProvider",
    "HttpTagger",
    "LemmaLexicon",
    "MalformedPretaggedError",
    "Metrics",
    "ModelChannel",
    "ModelVerdict",
    "NotFoundError",
    "NounPhrase",
    "PrecomputedFileProvider",
    "PretaggedTagger",
    "ProviderUnavailableError",
    "Quad",
    "RawDocument",
    "SearchHit",
    "StageOrderError",
    "SynonymLexicon",
    "TaggedSentence",
    "Token",
    "UndefinedSimilarityError",
    "UnknownPhraseError",
    "VerdictRecord",
    "WordVectorAverageProvider",
    "apply_feedback",
    "build_expanded_set",
    "build_store",
    "chunk_noun_phrases",
    "classify_single",
    "confusion",
    "cosine_similarity",
    "dedupe_quads",
    "degree_report",
    "expand_quad",
    "extract_candidate_triples",
    "extract_corpus",
    "extract_quads",
    "extract_training_quads",
    "filter_quads",
    "intersection_degree",
    "make_provider",
    "metrics",
    "normalize",
    "pos_tag",
    "preprocess_document",
    "quad_id",
    "split_sentences",
    "tokenize_and_lemmatize",
    "top_k_similar",
]
