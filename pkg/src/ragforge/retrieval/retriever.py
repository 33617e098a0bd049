"""Query embedding and execution of the retriever matrix."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from typing import Callable, Mapping, Optional, Sequence

from ragforge.chunking.models import ChunkingStrategy
from ragforge.embedding.fusion import (
    EmbeddingStrategy,
    EmbeddingVector,
    canonical_text,
    embed_content,
    embed_text,
    fuse_tfidf,
)
from ragforge.embedding.providers import BaseEmbedder
from ragforge.embedding.tfidf import TfidfModel
from ragforge.errors import RetrievalError
from ragforge.index.vector_index import VectorIndex
from .models import QueryRecord, RankedHit, RetrievalResult, RetrieverConfig, all_configs


logger = logging.getLogger(__name__)


def intent_prefixed(query: QueryRecord) -> str:
    return f"[intents: {query.intent.value}]\n{canonical_text(query.text)}"


def embed_query(
    query: QueryRecord,
    config: RetrieverConfig,
    provider: BaseEmbedder,
    tfidf_model: Optional[TfidfModel] = None,
) -> EmbeddingVector:
    """Query vector for one retriever configuration."""
    strategy = config.embedding_strategy
    if strategy == EmbeddingStrategy.CONTENT:
        return embed_content(query.text, provider, query.query_id)
    if strategy == EmbeddingStrategy.TFIDF_WEIGHTED:
        if tfidf_model is None:
            raise RetrievalError(f"{config.cell}: TF-IDF model required for query {query.query_id}")
        content = embed_content(query.text, provider, query.query_id)
        return fuse_tfidf(content, query.text, tfidf_model, config.weights)
    values = embed_text(provider, intent_prefixed(query), query.query_id)
    return EmbeddingVector(values, EmbeddingStrategy.PREFIX_FUSION, query.query_id)


def retrieve(
    query: QueryRecord,
    config: RetrieverConfig,
    index: VectorIndex,
    provider: BaseEmbedder,
    tfidf_model: Optional[TfidfModel] = None,
) -> RetrievalResult:
    """Embed one query and search one index; search time excludes embedding."""
    start = time.perf_counter_ns()
    vector = embed_query(query, config, provider, tfidf_model)
    embedded = time.perf_counter_ns()
    hits = index.search(vector.values, config.k)
    searched = time.perf_counter_ns()
    return RetrievalResult(
        query_id=query.query_id,
        config=config.cell,
        hits=[RankedHit(hit.chunk_id, hit.score, rank) for rank, hit in enumerate(hits, start=1)],
        latency_micros=(searched - embedded) // 1000,
        embed_latency_micros=(embedded - start) // 1000,
    )


def run_matrix(
    queries: Sequence[QueryRecord],
    indexes: Mapping[str, VectorIndex],
    provider: BaseEmbedder,
    tfidf_models: Mapping[ChunkingStrategy, TfidfModel],
    k: int = 10,
    configs: Optional[Sequence[RetrieverConfig]] = None,
    parallelism: int = 1,
    on_progress: Optional[Callable[[str], None]] = None,
    allow_subset: bool = False,
) -> list[RetrievalResult]:
    """
    Run every query against every configuration.

    Args:
        queries: Queries to run; missing intents are detected here.
        indexes: Cell name ("semantic+content", ...) to index.
        provider: Embedder for query vectors.
        tfidf_models: Fitted TF-IDF model per chunking strategy, needed by
            the tfidf_weighted cells.
        k: Hits per query when ``configs`` is not given.
        configs: Configurations to run; defaults to all nine cells.
        parallelism: Worker threads per configuration.
        on_progress: Called with each cell name once its queries are done.
        allow_subset: Accept ``configs`` covering only part of the matrix.
            Results that feed an evaluation must cover all nine cells.

    Returns:
        Results ordered config-major, then by query order.

    Raises:
        RetrievalError: A cell has no configuration (unless ``allow_subset``),
            or an index or TF-IDF model is missing. Raised before any query runs.
    """
    configs = list(configs) if configs is not None else all_configs(k)
    if not allow_subset:
        covered = {config.cell for config in configs}
        absent = [config.cell for config in all_configs() if config.cell not in covered]
        if absent:
            raise RetrievalError(f"Incomplete retriever matrix, no configuration for {', '.join(absent)}")
    missing = [config.cell for config in configs if config.cell not in indexes]
    if missing:
        raise RetrievalError(f"Missing index for {', '.join(missing)}")
    missing_models = sorted({
        config.chunking_strategy.value
        for config in configs
        if config.embedding_strategy == EmbeddingStrategy.TFIDF_WEIGHTED
        and config.chunking_strategy not in tfidf_models
    })
    if missing_models:
        raise RetrievalError(f"Missing TF-IDF model for {', '.join(missing_models)}")

    queries = [query if query.detected_intent else query.with_intent() for query in queries]
    results: list[RetrievalResult] = []
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as executor:
        for config in configs:
            index = indexes[config.cell]
            model = tfidf_models.get(config.chunking_strategy)
            search_one = partial(
                retrieve, config=config, index=index, provider=provider, tfidf_model=model
            )
            results.extend(executor.map(search_one, queries))
            logger.debug(f"{config.cell}: {len(queries)} queries")
            if on_progress:
                on_progress(config.cell)
    logger.info(f"Retrieved {len(queries)} queries across {len(configs)} configurations")
    return results

