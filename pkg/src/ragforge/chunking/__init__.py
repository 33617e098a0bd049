"""Document chunking: naive, recursive and semantic strategies."""
from .models import ChunkingConfig, ChunkingStrategy, ChunkRecord, ChunkSet, ChunkStats
from .tokenizer import Tokenizer, WhitespaceTokenizer, get_tokenizer, word_tokens
from .naive import NaiveChunker, chunk_naive
from .recursive import DELIMITERS, RecursiveChunker, chunk_recursive
from .semantic import (
    SemanticChunker,
    chunk_coherence,
    chunk_semantic,
    coherence,
    sentence_spans,
)
from .corpus import (
    chunk_corpus,
    compare_chunk_counts,
    compute_stats,
    get_chunker,
    load_chunks,
    save_chunks,
)

__all__ = [
    "ChunkingConfig", "ChunkingStrategy", "ChunkRecord", "ChunkSet", "ChunkStats",
    "Tokenizer", "WhitespaceTokenizer", "get_tokenizer", "word_tokens",
    "NaiveChunker", "chunk_naive",
    "RecursiveChunker", "chunk_recursive", "DELIMITERS",
    "SemanticChunker", "chunk_semantic", "chunk_coherence", "coherence", "sentence_spans",
    "chunk_corpus", "compute_stats", "compare_chunk_counts", "get_chunker",
    "save_chunks", "load_chunks",
]
