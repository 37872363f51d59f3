"""Deterministic text-classification data augmentation.

Strategies: dag (summarize three same-class documents into a new one),
dam (character-order-change word noise), and dagam (both combined).
"""

from .augment import (
    AugmentationPlan,
    AugmentationReport,
    build_dag_input,
    dedup_merge,
    plan_counts,
    run_dag,
    run_dagam,
    run_dam,
    run_pipeline,
    sample_triplet,
)
from .coc import CocParams, TokenSpan, alpha_core, apply_coc, scramble_word, segment_words, select_tokens
from .corpus import (
    Corpus,
    Document,
    clean_corpus,
    clean_english,
    dedup_key,
    load_corpus,
    stratified_half,
    write_corpus,
)
from .errors import (
    BackendError,
    ConfigError,
    CorpusError,
    DagamError,
    MalformedResponseError,
    PlanError,
)
from .summarize import (
    ExtractiveBackend,
    HttpBackend,
    SummaryRequest,
    SummaryResponse,
    extractive_summarize,
    http_summarize,
    summarize_batch,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentationPlan",
    "AugmentationReport",
    "BackendError",
    "CocParams",
    "ConfigError",
    "Corpus",
    "CorpusError",
    "DagamError",
    "Document",
    "ExtractiveBackend",
    "HttpBackend",
    "MalformedResponseError",
    "PlanError",
    "SummaryRequest",
    "SummaryResponse",
    "TokenSpan",
    "alpha_core",
    "apply_coc",
    "build_dag_input",
    "clean_corpus",
    "clean_english",
    "dedup_key",
    "dedup_merge",
    "extractive_summarize",
    "http_summarize",
    "load_corpus",
    "plan_counts",
    "run_dag",
    "run_dagam",
    "run_dam",
    "run_pipeline",
    "sample_triplet",
    "scramble_word",
    "segment_words",
    "select_tokens",
    "stratified_half",
    "summarize_batch",
    "write_corpus",
]
