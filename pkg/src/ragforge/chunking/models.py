"""Chunk records and chunking configuration."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional


class ChunkingStrategy(str, Enum):
    """Document segmentation strategies."""
    NAIVE = "naive"
    RECURSIVE = "recursive"
    SEMANTIC = "semantic"


@dataclass(frozen=True)
class ChunkingConfig:
    """Size limits for one strategy. All sizes are in tokens."""
    strategy: ChunkingStrategy
    max_tokens: int
    overlap_tokens: int = 0
    min_tokens: int = 0               # semantic merge floor
    breakpoint_percentile: float = 25.0

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")
        if not 0 <= self.overlap_tokens < self.max_tokens:
            raise ValueError(
                f"overlap_tokens must be in [0, max_tokens), got {self.overlap_tokens}"
            )
        if self.min_tokens >= self.max_tokens:
            raise ValueError(
                f"min_tokens must be < max_tokens, got {self.min_tokens} >= {self.max_tokens}"
            )
        if not 0 < self.breakpoint_percentile < 100:
            raise ValueError(
                f"breakpoint_percentile must be in (0, 100), got {self.breakpoint_percentile}"
            )


@dataclass
class ChunkRecord:
    """A contiguous, position-tracked piece of a document."""
    chunk_id: str                    # doc_id + "#" + index
    doc_id: str
    strategy: ChunkingStrategy
    text: str
    token_count: int
    char_span: tuple[int, int]       # [start, end) into the source body
    source_tag: str = ""
    coherence: Optional[float] = None  # semantic only

    @property
    def index(self) -> int:
        return int(self.chunk_id.rsplit("#", 1)[1])

    def to_dict(self) -> dict[str, Any]:
        return {
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "strategy": self.strategy.value,
            "text": self.text,
            "token_count": self.token_count,
            "char_span": list(self.char_span),
            "source_tag": self.source_tag,
            "coherence": self.coherence,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ChunkRecord":
        start, end = data["char_span"]
        return cls(
            chunk_id=data["chunk_id"],
            doc_id=data["doc_id"],
            strategy=ChunkingStrategy(data["strategy"]),
            text=data["text"],
            token_count=int(data["token_count"]),
            char_span=(int(start), int(end)),
            source_tag=data.get("source_tag", ""),
            coherence=data.get("coherence"),
        )


def make_chunk_id(doc_id: str, index: int) -> str:
    return f"{doc_id}#{index}"


@dataclass
class ChunkStats:
    """Summary statistics for one strategy's chunks."""
    strategy: ChunkingStrategy
    documents: int = 0
    chunk_count: int = 0
    mean_tokens: float = 0.0
    max_tokens: int = 0
    min_tokens: int = 0
    chunks_per_document: float = 0.0
    mean_coherence: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "strategy": self.strategy.value,
            "documents": self.documents,
            "chunk_count": self.chunk_count,
            "mean_tokens": self.mean_tokens,
            "max_tokens": self.max_tokens,
            "min_tokens": self.min_tokens,
            "chunks_per_document": self.chunks_per_document,
            "mean_coherence": self.mean_coherence,
        }


@dataclass
class ChunkSet:
    """All chunks of a corpus under one strategy."""
    strategy: ChunkingStrategy
    chunks: list[ChunkRecord] = field(default_factory=list)
    stats: Optional[ChunkStats] = None

    def __len__(self) -> int:
        return len(self.chunks)

    def __iter__(self):
        return iter(self.chunks)
