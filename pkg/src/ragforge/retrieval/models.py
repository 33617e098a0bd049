"""Retriever configurations, queries and results."""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

from ragforge.chunking.models import ChunkingStrategy
from ragforge.embedding.fusion import EmbeddingStrategy, FusionWeights
from ragforge.errors import RetrievalError
from ragforge.jsonl import read_jsonl, write_jsonl
from ragforge.vocabulary import Intent, detect_intent


@dataclass(frozen=True)
class RetrieverConfig:
    """One cell of the chunking x embedding matrix."""
    chunking_strategy: ChunkingStrategy
    embedding_strategy: EmbeddingStrategy
    k: int = 10
    weights: FusionWeights = field(default_factory=FusionWeights)

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")

    @property
    def cell(self) -> str:
        return cell_name(self.chunking_strategy, self.embedding_strategy)


def cell_name(chunking: ChunkingStrategy, embedding: EmbeddingStrategy) -> str:
    return f"{chunking.value}+{embedding.value}"


def parse_cell(name: str) -> tuple[ChunkingStrategy, EmbeddingStrategy]:
    """"recursive+prefix_fusion" -> (RECURSIVE, PREFIX_FUSION)."""
    chunking, sep, embedding = name.partition("+")
    try:
        if not sep:
            raise ValueError
        return ChunkingStrategy(chunking), EmbeddingStrategy(embedding)
    except ValueError:
        raise ValueError(
            f"Unknown retriever config {name!r}; expected <chunking>+<embedding>, "
            f"e.g. semantic+prefix_fusion"
        ) from None


def all_configs(k: int = 10, weights: FusionWeights = FusionWeights()) -> list[RetrieverConfig]:
    """All nine configurations, chunking-major."""
    return [
        RetrieverConfig(chunking, embedding, k=k, weights=weights)
        for chunking in ChunkingStrategy
        for embedding in EmbeddingStrategy
    ]


@dataclass(frozen=True)
class QueryRecord:
    query_id: str
    text: str
    detected_intent: Optional[Intent] = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"Query {self.query_id} has empty text")

    @property
    def intent(self) -> Intent:
        return self.detected_intent or detect_intent(self.text)

    def with_intent(self) -> "QueryRecord":
        return QueryRecord(self.query_id, self.text, self.intent)

    def to_dict(self) -> dict[str, Any]:
        data = {"query_id": self.query_id, "text": self.text}
        if self.detected_intent:
            data["detected_intent"] = self.detected_intent.value
        return data


def load_queries(path: Path) -> list[QueryRecord]:
    """Read {query_id, text} lines; intents are detected on load."""
    path = Path(path)
    queries = []
    seen: set[str] = set()
    try:
        for line_number, data in read_jsonl(path):
            try:
                query = QueryRecord(str(data["query_id"]), data["text"])
            except KeyError as e:
                raise RetrievalError(f"{path}: line {line_number}: missing field {e}") from e
            except ValueError as e:
                raise RetrievalError(f"{path}: line {line_number}: {e}") from e
            if query.query_id in seen:
                raise RetrievalError(f"{path}: line {line_number}: duplicate query_id {query.query_id}")
            seen.add(query.query_id)
            queries.append(query.with_intent())
    except ValueError as e:
        raise RetrievalError(str(e)) from e
    except FileNotFoundError as e:
        raise RetrievalError(f"Query file not found: {path}") from e
    if not queries:
        raise RetrievalError(f"{path}: no queries")
    return queries


def save_queries(path: Path, queries: Iterable[QueryRecord]) -> int:
    return write_jsonl(path, (query.to_dict() for query in queries))


@dataclass
class RankedHit:
    chunk_id: str
    score: float
    rank: int


@dataclass
class RetrievalResult:
    """Ranked hits of one query under one retriever configuration."""
    query_id: str
    config: str  # cell name
    hits: list[RankedHit]
    latency_micros: int = 0        # index search only
    embed_latency_micros: int = 0  # query embedding

    @property
    def chunk_ids(self) -> list[str]:
        return [hit.chunk_id for hit in self.hits]

    def top(self, k: int) -> list[RankedHit]:
        return self.hits[:k]

    def to_dict(self) -> dict[str, Any]:
        return {
            "query_id": self.query_id,
            "config": self.config,
            "hits": [{"chunk_id": h.chunk_id, "score": h.score, "rank": h.rank} for h in self.hits],
            "latency_micros": self.latency_micros,
            "embed_latency_micros": self.embed_latency_micros,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RetrievalResult":
        return cls(
            query_id=data["query_id"],
            config=data["config"],
            hits=[RankedHit(h["chunk_id"], float(h["score"]), int(h["rank"])) for h in data["hits"]],
            latency_micros=int(data.get("latency_micros", 0)),
            embed_latency_micros=int(data.get("embed_latency_micros", 0)),
        )


def save_results(path: Path, results: Iterable[RetrievalResult]) -> int:
    return write_jsonl(path, (result.to_dict() for result in results))


def load_results(path: Path) -> list[RetrievalResult]:
    return [RetrievalResult.from_dict(data) for _, data in read_jsonl(path)]
