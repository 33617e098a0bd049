"""Hierarchical delimiter splitting with token overlap."""
from bisect import bisect_left
from collections import deque
from typing import Optional

from ragforge.corpus.models import Document
from .base import BaseChunker
from .models import ChunkingConfig, ChunkingStrategy, ChunkRecord
from .tokenizer import Tokenizer


# Coarse to fine. Past the last level, pieces are single tokens.
DELIMITERS: tuple[str, ...] = ("\n\n", "\n", ". ", " ")

# (first token, end token, level the piece was produced at)
_Piece = tuple[int, int, int]


class RecursiveChunker(BaseChunker):
    """
    Split documents on paragraph, line, sentence and word boundaries.

    Pieces are packed greedily into chunks of at most ``max_tokens`` tokens. A
    piece is split at the next delimiter level only when it cannot fit even in
    a fresh chunk. Every chunk after the first begins with the trailing
    ``overlap_tokens`` tokens of its predecessor, so chunks are contiguous
    token ranges of the document.
    """

    strategy = ChunkingStrategy.RECURSIVE

    def chunk(self, doc: Document) -> list[ChunkRecord]:
        spans = self.tokenizer.spans(doc.body)
        if not spans:
            return []

        ranges = self._pack(doc.body, spans)
        return [
            self._create_chunk(doc, index, spans[first][0], spans[end - 1][1], end - first)
            for index, (first, end) in enumerate(ranges)
        ]

    def _pack(self, body: str, spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
        """Token ranges of the final chunks."""
        max_tokens = self.config.max_tokens
        overlap = self.config.overlap_tokens
        starts = [s for s, _ in spans]

        ranges: list[tuple[int, int]] = []
        pending: deque[_Piece] = deque([(0, len(spans), -1)])
        chunk_start = chunk_end = 0
        has_content = False  # chunk holds more than carried-over overlap

        while pending:
            first, end, level = pending.popleft()

            if (chunk_end - chunk_start) + (end - first) <= max_tokens:
                chunk_end = end
                has_content = True
                continue

            if has_content:
                ranges.append((chunk_start, chunk_end))
                chunk_start = chunk_end - min(overlap, chunk_end - chunk_start)
                has_content = False
                pending.appendleft((first, end, level))
                continue

            # Does not fit even next to the overlap alone: go one level finer.
            pending.extendleft(reversed(self._split(body, spans, starts, first, end, level + 1)))

        if has_content:
            ranges.append((chunk_start, chunk_end))
        return ranges

    @staticmethod
    def _split(
        body: str,
        spans: list[tuple[int, int]],
        starts: list[int],
        first: int,
        end: int,
        level: int,
    ) -> list[_Piece]:
        if level >= len(DELIMITERS):
            return [(i, i + 1, level) for i in range(first, end)]

        delimiter = DELIMITERS[level]
        seg_start = spans[first][0]
        segment = body[seg_start:spans[end - 1][1]]

        cuts = [first]
        pos = segment.find(delimiter)
        while pos != -1:
            boundary = bisect_left(starts, seg_start + pos + len(delimiter), first, end)
            if cuts[-1] < boundary < end:
                cuts.append(boundary)
            pos = segment.find(delimiter, pos + len(delimiter))
        cuts.append(end)

        return [(a, b, level) for a, b in zip(cuts, cuts[1:])]


def chunk_recursive(
    doc: Document, cfg: ChunkingConfig, tokenizer: Optional[Tokenizer] = None
) -> list[ChunkRecord]:
    return RecursiveChunker(cfg, tokenizer).chunk(doc)
