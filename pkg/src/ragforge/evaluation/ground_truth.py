"""
Pooled cross-encoder relevance judgments.

For every query the candidate pool is the union of each configuration's top
``pool_size`` hits. Chunk ids repeat across chunking strategies, so pool
entries are keyed by (chunk_id, judged text); an entry shared by several
strategies is judged once and remembers which strategies produced it.
"""
import hashlib
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from ragforge.chunking.models import ChunkingStrategy
from ragforge.errors import EvaluationError, ProviderError
from ragforge.jsonl import append_jsonl, read_jsonl, write_jsonl
from ragforge.retrieval.models import QueryRecord, RetrievalResult, all_configs, parse_cell
from .rerank import BaseReranker


logger = logging.getLogger(__name__)

# chunking strategy -> chunk_id -> text shown to the reranker
TextLookup = Mapping[ChunkingStrategy, Mapping[str, str]]


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass
class RelevanceJudgment:
    """
    Reranker verdict for one pooled chunk.

    ``relevant`` means normalized_score >= tau. ``highly_relevant`` means
    normalized_score is above the query's percentile threshold or equals
    1.0; the second clause keeps the pool maximum highly relevant when ties
    push the threshold up to 1.0. In a degenerate pool (all raw scores
    equal) every candidate is highly relevant.
    """
    query_id: str
    chunk_id: str
    raw_score: float
    normalized_score: float
    relevant: bool
    highly_relevant: bool
    strategies: list[str] = field(default_factory=list)
    text_hash: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "query_id": self.query_id,
            "chunk_id": self.chunk_id,
            "strategies": self.strategies,
            "text_hash": self.text_hash,
            "raw_score": self.raw_score,
            "normalized_score": self.normalized_score,
            "relevant": self.relevant,
            "highly_relevant": self.highly_relevant,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RelevanceJudgment":
        return cls(
            query_id=data["query_id"],
            chunk_id=data["chunk_id"],
            raw_score=float(data["raw_score"]),
            normalized_score=float(data["normalized_score"]),
            relevant=bool(data["relevant"]),
            highly_relevant=bool(data["highly_relevant"]),
            strategies=list(data.get("strategies", [])),
            text_hash=data.get("text_hash", ""),
        )


class JudgmentSet:
    """Judgments indexed by query, and by (query, chunking strategy, chunk_id)."""

    def __init__(self, judgments: Iterable[RelevanceJudgment]):
        self.judgments = list(judgments)
        self._by_query: dict[str, list[RelevanceJudgment]] = defaultdict(list)
        self._lookup: dict[tuple[str, str, str], RelevanceJudgment] = {}
        for judgment in self.judgments:
            self._by_query[judgment.query_id].append(judgment)
            for strategy in judgment.strategies:
                self._lookup[(judgment.query_id, strategy, judgment.chunk_id)] = judgment

    def __len__(self) -> int:
        return len(self.judgments)

    def __iter__(self):
        return iter(self.judgments)

    @property
    def query_ids(self) -> list[str]:
        return list(self._by_query)

    def for_query(self, query_id: str) -> list[RelevanceJudgment]:
        return self._by_query.get(query_id, [])

    def lookup(self, query_id: str, strategy: str, chunk_id: str) -> Optional[RelevanceJudgment]:
        """Judgment for a retrieved chunk; None means unjudged (not relevant)."""
        return self._lookup.get((query_id, strategy, chunk_id))


def min_max_normalize(scores: Sequence[float]) -> list[float]:
    """Scale to [0, 1]; a single score or equal scores all map to 1.0."""
    if not scores:
        return []
    low, high = min(scores), max(scores)
    if len(scores) == 1 or high == low:
        return [1.0] * len(scores)
    span = high - low
    return [(score - low) / span for score in scores]


def is_degenerate(scores: Sequence[float]) -> bool:
    return len(scores) <= 1 or max(scores) == min(scores)


@dataclass
class _PoolEntry:
    chunk_id: str
    text: str
    strategies: list[str]


def build_pools(
    queries: Sequence[QueryRecord],
    results: Sequence[RetrievalResult],
    texts: TextLookup,
    pool_size: int = 50,
) -> dict[str, list[_PoolEntry]]:
    """Per-query union of every configuration's top ``pool_size`` hits, first-seen order."""
    expected = set(_CELLS)
    by_query: dict[str, dict[str, RetrievalResult]] = defaultdict(dict)
    for result in results:
        by_query[result.query_id][result.config] = result

    pools: dict[str, list[_PoolEntry]] = {}
    for query in queries:
        contributed = by_query.get(query.query_id, {})
        missing = sorted(expected - contributed.keys())
        if missing:
            raise EvaluationError(
                f"Query {query.query_id}: no retrieval results for {', '.join(missing)}"
            )
        entries: dict[tuple[str, str], _PoolEntry] = {}
        for cell in sorted(contributed, key=_cell_order):
            strategy, _ = parse_cell(cell)
            for hit in contributed[cell].hits[:pool_size]:
                try:
                    text = texts[strategy][hit.chunk_id]
                except KeyError:
                    raise EvaluationError(
                        f"Query {query.query_id}: {cell} hit {hit.chunk_id} has no chunk text"
                    ) from None
                entry = entries.setdefault((hit.chunk_id, text), _PoolEntry(hit.chunk_id, text, []))
                if strategy.value not in entry.strategies:
                    entry.strategies.append(strategy.value)
        pools[query.query_id] = list(entries.values())
    return pools


_CELLS = [config.cell for config in all_configs()]


def _cell_order(cell: str) -> int:
    return _CELLS.index(cell) if cell in _CELLS else len(_CELLS)


class GroundTruthBuilder:
    """Scores pooled candidates with a reranker and derives relevance labels."""

    def __init__(
        self,
        reranker: BaseReranker,
        pool_size: int = 50,
        tau: float = 0.8,
        percentile: float = 95.0,
        percentile_scope: str = "query",
        batch_size: int = 32,
        max_retries: int = 3,
        retry_wait: float = 1.0,
    ):
        if percentile_scope not in ("query", "global"):
            raise ValueError(f"percentile_scope must be 'query' or 'global', got {percentile_scope!r}")
        self.reranker = reranker
        self.pool_size = pool_size
        self.tau = tau
        self.percentile = percentile
        self.percentile_scope = percentile_scope
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.retry_wait = retry_wait

    def build(
        self,
        queries: Sequence[QueryRecord],
        results: Sequence[RetrievalResult],
        texts: TextLookup,
        checkpoint_path: Optional[Path] = None,
        on_progress: Optional[Callable[[str], None]] = None,
    ) -> JudgmentSet:
        pools = build_pools(queries, results, texts, self.pool_size)
        cache = _load_score_cache(checkpoint_path) if checkpoint_path else {}
        if cache:
            logger.info(f"Reusing {len(cache)} cached rerank scores")

        raw: dict[str, list[float]] = {}
        for query in queries:
            pool = pools[query.query_id]
            raw[query.query_id] = self._score_pool(query, pool, cache, checkpoint_path)
            if on_progress:
                on_progress(query.query_id)

        normalized = {qid: min_max_normalize(scores) for qid, scores in raw.items()}
        global_threshold = None
        if self.percentile_scope == "global":
            spread = [s for qid, scores in normalized.items() if not is_degenerate(raw[qid]) for s in scores]
            global_threshold = float(np.percentile(spread, self.percentile)) if spread else None

        judgments = []
        for query in queries:
            pool = pools[query.query_id]
            scores = raw[query.query_id]
            norm = normalized[query.query_id]
            degenerate = is_degenerate(scores)
            if degenerate:
                threshold = None
            elif global_threshold is not None:
                threshold = global_threshold
            else:
                threshold = float(np.percentile(norm, self.percentile))
            for entry, raw_score, normalized_score in zip(pool, scores, norm):
                judgments.append(RelevanceJudgment(
                    query_id=query.query_id,
                    chunk_id=entry.chunk_id,
                    raw_score=raw_score,
                    normalized_score=normalized_score,
                    relevant=normalized_score >= self.tau,
                    # the pool maximum always qualifies, even when tied
                    highly_relevant=degenerate or normalized_score > threshold or normalized_score == 1.0,
                    strategies=entry.strategies,
                    text_hash=text_hash(entry.text),
                ))
        logger.info(f"Judged {len(judgments)} pooled candidates for {len(queries)} queries")
        return JudgmentSet(judgments)

    def _score_pool(
        self,
        query: QueryRecord,
        pool: list[_PoolEntry],
        cache: dict[tuple[str, str, str], float],
        checkpoint_path: Optional[Path],
    ) -> list[float]:
        keys = [(query.query_id, entry.chunk_id, text_hash(entry.text)) for entry in pool]
        todo = [i for i, key in enumerate(keys) if key not in cache]
        for start in range(0, len(todo), self.batch_size):
            batch = todo[start:start + self.batch_size]
            scores = self._score_batch(query, [pool[i].text for i in batch])
            fresh = {keys[i]: score for i, score in zip(batch, scores)}
            cache.update(fresh)
            if checkpoint_path:
                append_jsonl(checkpoint_path, (
                    {"query_id": q, "chunk_id": c, "text_hash": h, "raw_score": s}
                    for (q, c, h), s in fresh.items()
                ))
        return [cache[key] for key in keys]

    def _score_batch(self, query: QueryRecord, documents: list[str]) -> list[float]:
        retrying = Retrying(
            stop=stop_after_attempt(self.max_retries + 1),
            wait=wait_exponential(multiplier=self.retry_wait, max=max(self.retry_wait * 8, 0)),
            retry=retry_if_exception_type(ProviderError),
            reraise=True,
        )
        try:
            for attempt in retrying:
                with attempt:
                    scores = self.reranker.score(query.text, documents)
        except ProviderError as e:
            raise EvaluationError(
                f"Reranker failed for query {query.query_id} after {self.max_retries + 1} attempts: {e}; "
                "scores so far are checkpointed, re-run to resume"
            ) from e
        if len(scores) != len(documents):
            raise EvaluationError(
                f"Reranker returned {len(scores)} scores for {len(documents)} documents "
                f"(query {query.query_id})"
            )
        return [float(score) for score in scores]


def build_ground_truth(
    queries: Sequence[QueryRecord],
    results: Sequence[RetrievalResult],
    texts: TextLookup,
    reranker: BaseReranker,
    pool_size: int = 50,
    **kwargs: Any,
) -> JudgmentSet:
    """
    Build relevance judgments for the pooled retrieval results.

    Args:
        queries: Queries that were run through the retriever matrix.
        results: Retrieval results; the top ``pool_size`` hits of every
            configuration are pooled per query.
        texts: chunk_id to the text the reranker judges.
        reranker: Scores (query, text) pairs.
        pool_size: Hits taken from each configuration's ranking.
        **kwargs: GroundTruthBuilder options (tau, percentile,
            percentile_scope, batch_size, max_retries, retry_wait) and
            ``checkpoint_path`` for the raw score cache.

    Returns:
        One judgment per pooled (query, chunk) pair. A candidate is highly
        relevant when its normalized score is above the percentile
        threshold, or when it is the pool maximum (normalized score 1.0),
        so every non-empty pool has at least one highly relevant chunk.

    Raises:
        EvaluationError: A query lacks results for a configuration, a pooled
            chunk has no text, or the reranker keeps failing after retries.
    """
    checkpoint_path = kwargs.pop("checkpoint_path", None)
    builder = GroundTruthBuilder(reranker, pool_size=pool_size, **kwargs)
    return builder.build(queries, results, texts, checkpoint_path=checkpoint_path)


def _load_score_cache(path: Path) -> dict[tuple[str, str, str], float]:
    path = Path(path)
    if not path.exists():
        return {}
    return {
        (data["query_id"], data["chunk_id"], data["text_hash"]): float(data["raw_score"])
        for _, data in read_jsonl(path)
    }


def save_judgments(path: Path, judgments: JudgmentSet) -> int:
    return write_jsonl(path, (judgment.to_dict() for judgment in judgments))


def load_judgments(path: Path) -> JudgmentSet:
    return JudgmentSet(RelevanceJudgment.from_dict(data) for _, data in read_jsonl(path))
