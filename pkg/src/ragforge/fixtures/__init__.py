"""Bundled synthetic corpus for smoke runs and tests."""
from .synthetic import (
    SOURCE_TAGS,
    TOPICS,
    FixtureSummary,
    build_documents,
    build_queries,
    fixture_config,
    write_fixture,
)

__all__ = [
    "SOURCE_TAGS", "TOPICS", "FixtureSummary", "build_documents", "build_queries",
    "fixture_config", "write_fixture",
]
