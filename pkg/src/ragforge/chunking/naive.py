"""Fixed-size token windows."""
from typing import Optional

from ragforge.corpus.models import Document
from .base import BaseChunker
from .models import ChunkingConfig, ChunkingStrategy, ChunkRecord
from .tokenizer import Tokenizer


class NaiveChunker(BaseChunker):
    """Consecutive, non-overlapping windows of exactly ``max_tokens`` tokens.

    The last window may be shorter. Concatenating the token sequences of the
    chunks reproduces the document's token sequence.
    """

    strategy = ChunkingStrategy.NAIVE

    def chunk(self, doc: Document) -> list[ChunkRecord]:
        spans = self.tokenizer.spans(doc.body)
        size = self.config.max_tokens

        chunks = []
        for index, first in enumerate(range(0, len(spans), size)):
            window = spans[first:first + size]
            chunks.append(self._create_chunk(
                doc, index, window[0][0], window[-1][1], len(window)
            ))
        return chunks


def chunk_naive(
    doc: Document, cfg: ChunkingConfig, tokenizer: Optional[Tokenizer] = None
) -> list[ChunkRecord]:
    return NaiveChunker(cfg, tokenizer).chunk(doc)
