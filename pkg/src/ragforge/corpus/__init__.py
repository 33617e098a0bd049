"""Corpus ingestion and storage."""
from .models import Corpus, Document
from .readers import BaseReader, JsonlReader, ReaderRegistry, TextReader, get_registry
from .store import (
    corpus_token_counts,
    ingest_directory,
    ingest_sources,
    load_corpus,
    save_corpus,
)

__all__ = [
    "Corpus", "Document",
    "BaseReader", "TextReader", "JsonlReader", "ReaderRegistry", "get_registry",
    "ingest_directory", "ingest_sources", "save_corpus", "load_corpus",
    "corpus_token_counts",
]
