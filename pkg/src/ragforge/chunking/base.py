"""Shared chunker plumbing."""
from abc import ABC, abstractmethod
from typing import Optional

from ragforge.corpus.models import Document
from .models import ChunkingConfig, ChunkingStrategy, ChunkRecord, make_chunk_id
from .tokenizer import Tokenizer, get_tokenizer


class BaseChunker(ABC):
    """Splits one document into chunks under a fixed config."""

    strategy: ChunkingStrategy

    def __init__(self, config: ChunkingConfig, tokenizer: Optional[Tokenizer] = None):
        self.config = config
        self.tokenizer = tokenizer or get_tokenizer()

    @abstractmethod
    def chunk(self, doc: Document) -> list[ChunkRecord]:
        """Split ``doc``; chunks are returned in document order."""

    def _create_chunk(
        self,
        doc: Document,
        index: int,
        start: int,
        end: int,
        token_count: int,
        coherence: Optional[float] = None,
    ) -> ChunkRecord:
        return ChunkRecord(
            chunk_id=make_chunk_id(doc.doc_id, index),
            doc_id=doc.doc_id,
            strategy=self.strategy,
            text=doc.body[start:end],
            token_count=token_count,
            char_span=(start, end),
            source_tag=doc.source_tag,
            coherence=coherence,
        )
