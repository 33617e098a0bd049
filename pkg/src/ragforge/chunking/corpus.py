"""Corpus-level chunking, statistics and chunk persistence."""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional

from ragforge.corpus.models import Corpus, Document
from ragforge.errors import ChunkingError
from ragforge.jsonl import read_jsonl, write_jsonl
from .base import BaseChunker
from .models import ChunkingConfig, ChunkingStrategy, ChunkRecord, ChunkSet, ChunkStats
from .naive import NaiveChunker
from .recursive import RecursiveChunker
from .semantic import SemanticChunker, SentenceEmbedder
from .tokenizer import Tokenizer


logger = logging.getLogger(__name__)


def get_chunker(
    cfg: ChunkingConfig,
    embedder: Optional[SentenceEmbedder] = None,
    tokenizer: Optional[Tokenizer] = None,
) -> BaseChunker:
    if cfg.strategy == ChunkingStrategy.NAIVE:
        return NaiveChunker(cfg, tokenizer)
    if cfg.strategy == ChunkingStrategy.RECURSIVE:
        return RecursiveChunker(cfg, tokenizer)
    if embedder is None:
        raise ValueError("Semantic chunking needs a sentence embedder")
    return SemanticChunker(cfg, embedder, tokenizer)


def chunk_corpus(
    corpus: Corpus,
    cfg: ChunkingConfig,
    embedder: Optional[SentenceEmbedder] = None,
    tokenizer: Optional[Tokenizer] = None,
    parallelism: int = 1,
) -> ChunkSet:
    """Chunk every document; results keep corpus order regardless of parallelism."""
    chunker = get_chunker(cfg, embedder, tokenizer)

    def run(doc: Document) -> list[ChunkRecord]:
        try:
            return chunker.chunk(doc)
        except Exception as e:
            raise ChunkingError(f"{doc.doc_id}: {e}") from e

    if parallelism > 1 and len(corpus) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            per_doc = list(pool.map(run, corpus))
    else:
        per_doc = [run(doc) for doc in corpus]

    chunks = [chunk for doc_chunks in per_doc for chunk in doc_chunks]
    stats = compute_stats(cfg.strategy, chunks, documents=len(corpus))
    logger.info(
        f"{cfg.strategy.value}: {stats.chunk_count} chunks from {stats.documents} documents "
        f"(mean {stats.mean_tokens:.1f} tokens)"
    )
    return ChunkSet(strategy=cfg.strategy, chunks=chunks, stats=stats)


def compute_stats(
    strategy: ChunkingStrategy, chunks: list[ChunkRecord], documents: Optional[int] = None
) -> ChunkStats:
    if documents is None:
        documents = len({c.doc_id for c in chunks})
    if not chunks:
        return ChunkStats(strategy=strategy, documents=documents)

    sizes = [c.token_count for c in chunks]
    coherences = [c.coherence for c in chunks if c.coherence is not None]
    return ChunkStats(
        strategy=strategy,
        documents=documents,
        chunk_count=len(chunks),
        mean_tokens=sum(sizes) / len(sizes),
        max_tokens=max(sizes),
        min_tokens=min(sizes),
        chunks_per_document=len(chunks) / documents if documents else 0.0,
        mean_coherence=sum(coherences) / len(coherences) if coherences else None,
    )


def compare_chunk_counts(stats: dict[ChunkingStrategy, ChunkStats]) -> dict[str, float]:
    """Relative chunk-count change between strategies, e.g. semantic over recursive."""
    comparisons = {}
    for a, b in (
        (ChunkingStrategy.SEMANTIC, ChunkingStrategy.RECURSIVE),
        (ChunkingStrategy.SEMANTIC, ChunkingStrategy.NAIVE),
        (ChunkingStrategy.RECURSIVE, ChunkingStrategy.NAIVE),
    ):
        if a in stats and b in stats and stats[b].chunk_count:
            comparisons[f"{a.value}_vs_{b.value}"] = (
                stats[a].chunk_count / stats[b].chunk_count - 1.0
            )
    return comparisons


def save_chunks(path: Path, chunk_set: ChunkSet) -> None:
    write_jsonl(path, (c.to_dict() for c in chunk_set.chunks))


def load_chunks(path: Path, strategy: ChunkingStrategy) -> ChunkSet:
    chunks = []
    for line_number, record in read_jsonl(path):
        try:
            chunk = ChunkRecord.from_dict(record)
        except (KeyError, TypeError, ValueError) as e:
            raise ChunkingError(f"{path}: line {line_number}: malformed chunk ({e})") from e
        if chunk.strategy != strategy:
            raise ChunkingError(
                f"{path}: line {line_number}: expected {strategy.value} chunk, got {chunk.strategy.value}"
            )
        chunks.append(chunk)
    return ChunkSet(strategy=strategy, chunks=chunks, stats=compute_stats(strategy, chunks))
