"""Embedding-driven breakpoint segmentation."""
import logging
import re
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence

import numpy as np

from ragforge.corpus.models import Document
from ragforge.errors import ChunkingError
from .base import BaseChunker
from .models import ChunkingConfig, ChunkingStrategy, ChunkRecord
from .tokenizer import Tokenizer


logger = logging.getLogger(__name__)

SentenceEmbedder = Callable[[Sequence[str]], Any]

# Terminator followed by whitespace, or a hard newline.
_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+|\n")


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Character spans of sentences, trimmed of surrounding whitespace."""
    spans = []
    pos = 0
    for match in _SENTENCE_BREAK.finditer(text):
        _append_trimmed(text, pos, match.start(), spans)
        pos = match.end()
    _append_trimmed(text, pos, len(text), spans)
    return spans


def _append_trimmed(text: str, start: int, end: int, spans: list[tuple[int, int]]) -> None:
    piece = text[start:end]
    stripped = piece.strip()
    if stripped:
        start += len(piece) - len(piece.lstrip())
        spans.append((start, start + len(stripped)))


def coherence(vectors: np.ndarray) -> float:
    """Mean pairwise cosine similarity of row vectors; 1.0 for a single row."""
    n = len(vectors)
    if n < 2:
        return 1.0
    unit = _normalize_rows(vectors)
    sims = unit @ unit.T
    upper = sims[np.triu_indices(n, k=1)]
    return float(np.clip(upper.mean(), -1.0, 1.0))


def chunk_coherence(text: str, embedder: SentenceEmbedder) -> float:
    """Coherence of an arbitrary text, sentence by sentence."""
    sentences = [text[s:e] for s, e in sentence_spans(text)]
    if len(sentences) < 2:
        return 1.0
    if hasattr(embedder, "embed_batch"):
        embedder = embedder.embed_batch
    return coherence(np.asarray(embedder(sentences), dtype=np.float64))


def _normalize_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    return np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms > 0)


@dataclass
class _Unit:
    """A sentence, or a max_tokens window of an over-long sentence."""
    start: int
    end: int
    tokens: int


class SemanticChunker(BaseChunker):
    """
    Group sentences by similarity of consecutive sentence embeddings.

    A breakpoint is placed after sentence i when sim(i, i+1) is strictly below
    the configured percentile of all consecutive similarities in the document.
    Groups larger than ``max_tokens`` are split; groups smaller than
    ``min_tokens`` are merged into the adjacent group with the more similar
    centroid, as long as the merge stays within ``max_tokens``.
    """

    strategy = ChunkingStrategy.SEMANTIC

    def __init__(
        self,
        config: ChunkingConfig,
        embedder: SentenceEmbedder,
        tokenizer: Optional[Tokenizer] = None,
    ):
        super().__init__(config, tokenizer)
        if hasattr(embedder, "embed_batch"):
            embedder = embedder.embed_batch
        self.embedder = embedder
        self._dimension: Optional[int] = None

    def chunk(self, doc: Document) -> list[ChunkRecord]:
        units = self._units(doc.body)
        if not units:
            return []

        vectors = self._embed([doc.body[u.start:u.end] for u in units])
        groups = self._breakpoint_groups(vectors)
        groups = [g for group in groups for g in self._enforce_max(group, units)]
        groups = self._merge_small(groups, units, vectors)

        chunks = []
        for index, group in enumerate(groups):
            chunks.append(self._create_chunk(
                doc,
                index,
                units[group[0]].start,
                units[group[-1]].end,
                sum(units[i].tokens for i in group),
                coherence=coherence(vectors[group]),
            ))
        return chunks

    def _units(self, body: str) -> list[_Unit]:
        max_tokens = self.config.max_tokens
        units = []
        for start, end in sentence_spans(body):
            spans = self.tokenizer.spans(body[start:end])
            if not spans:
                continue
            if len(spans) <= max_tokens:
                units.append(_Unit(start, end, len(spans)))
                continue
            # Over-long sentence: forced split into token windows.
            for first in range(0, len(spans), max_tokens):
                window = spans[first:first + max_tokens]
                units.append(_Unit(start + window[0][0], start + window[-1][1], len(window)))
        return units

    def _embed(self, texts: list[str]) -> np.ndarray:
        vectors = np.asarray(self.embedder(texts), dtype=np.float64)
        if vectors.ndim != 2 or len(vectors) != len(texts):
            raise ChunkingError(
                f"Embedder returned shape {vectors.shape} for {len(texts)} sentences"
            )
        if self._dimension is None:
            self._dimension = vectors.shape[1]
        elif vectors.shape[1] != self._dimension:
            raise ChunkingError(
                f"Embedder dimension changed from {self._dimension} to {vectors.shape[1]}"
            )
        return _normalize_rows(vectors)

    def _breakpoint_groups(self, vectors: np.ndarray) -> list[list[int]]:
        n = len(vectors)
        if n < 2:
            return [list(range(n))]

        sims = np.einsum("ij,ij->i", vectors[:-1], vectors[1:])
        threshold = np.percentile(sims, self.config.breakpoint_percentile)

        groups, current = [], [0]
        for i in range(n - 1):
            if sims[i] < threshold:
                groups.append(current)
                current = []
            current.append(i + 1)
        groups.append(current)
        logger.debug(f"{len(groups) - 1} breakpoints at threshold {threshold:.4f}")
        return groups

    def _enforce_max(self, group: list[int], units: list[_Unit]) -> list[list[int]]:
        max_tokens = self.config.max_tokens
        parts, current, size = [], [], 0
        for i in group:
            if current and size + units[i].tokens > max_tokens:
                parts.append(current)
                current, size = [], 0
            current.append(i)
            size += units[i].tokens
        parts.append(current)
        return parts

    def _merge_small(
        self, groups: list[list[int]], units: list[_Unit], vectors: np.ndarray
    ) -> list[list[int]]:
        min_tokens = self.config.min_tokens
        max_tokens = self.config.max_tokens

        def size(group: list[int]) -> int:
            return sum(units[i].tokens for i in group)

        def centroid(group: list[int]) -> np.ndarray:
            c = vectors[group].mean(axis=0)
            norm = np.linalg.norm(c)
            return c / norm if norm > 0 else c

        merged = True
        while merged and len(groups) > 1:
            merged = False
            for i, group in enumerate(groups):
                group_size = size(group)
                if group_size >= min_tokens:
                    continue
                candidates = [
                    (float(centroid(group) @ centroid(groups[j])), -j, j)
                    for j in (i - 1, i + 1)
                    if 0 <= j < len(groups) and group_size + size(groups[j]) <= max_tokens
                ]
                if not candidates:
                    continue
                _, _, j = max(candidates)
                lo, hi = min(i, j), max(i, j)
                groups = groups[:lo] + [groups[lo] + groups[hi]] + groups[hi + 1:]
                merged = True
                break
        return groups


def chunk_semantic(
    doc: Document,
    cfg: ChunkingConfig,
    embedder: SentenceEmbedder,
    tokenizer: Optional[Tokenizer] = None,
) -> list[ChunkRecord]:
    return SemanticChunker(cfg, embedder, tokenizer).chunk(doc)
