"""LLM metadata generation for chunks."""
from .models import ChunkMetadata, EnrichedChunk
from .prompts import PromptPair, build_prompt, TRUNCATION_MARKER
from .parser import parse_metadata
from .mock import mock_enrich, mock_metadata
from .providers import BaseChatProvider, HttpChatProvider, MockChatProvider, get_chat_provider
from .enricher import (
    FALLBACK_TAG,
    EnrichmentReport,
    MetadataEnricher,
    enrich_chunks,
    load_enriched,
    make_batches,
    save_enriched,
)
from .stats import metadata_stats

__all__ = [
    "ChunkMetadata", "EnrichedChunk",
    "PromptPair", "build_prompt", "TRUNCATION_MARKER",
    "parse_metadata",
    "mock_enrich", "mock_metadata",
    "BaseChatProvider", "HttpChatProvider", "MockChatProvider", "get_chat_provider",
    "FALLBACK_TAG", "EnrichmentReport", "MetadataEnricher", "enrich_chunks",
    "load_enriched", "save_enriched", "make_batches",
    "metadata_stats",
]
