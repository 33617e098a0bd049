"""Retriever matrix, query intent detection and query execution."""
from ragforge.vocabulary import Intent, detect_intent
from .models import (
    QueryRecord,
    RankedHit,
    RetrievalResult,
    RetrieverConfig,
    all_configs,
    cell_name,
    load_queries,
    load_results,
    parse_cell,
    save_queries,
    save_results,
)
from .retriever import embed_query, intent_prefixed, retrieve, run_matrix

__all__ = [
    "Intent", "detect_intent",
    "QueryRecord", "RankedHit", "RetrievalResult", "RetrieverConfig", "all_configs",
    "cell_name", "parse_cell", "load_queries", "save_queries", "load_results", "save_results",
    "embed_query", "intent_prefixed", "retrieve", "run_matrix",
]
