"""Batch embedding of enriched chunk sets under all strategies."""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from ragforge.chunking.tokenizer import Tokenizer
from ragforge.errors import EmbeddingError, ProviderError
from ragforge.metadata.models import EnrichedChunk
from .fusion import (
    EmbeddingStrategy,
    EmbeddingVector,
    FusionWeights,
    canonical_text,
    fuse_tfidf,
    normalize,
    prefixed_text,
)
from .providers import BaseEmbedder
from .tfidf import TfidfModel, metadata_text


logger = logging.getLogger(__name__)


def _embed_texts(
    provider: BaseEmbedder,
    texts: list[str],
    owner_ids: list[str],
    batch_size: int,
    parallelism: int,
) -> list[np.ndarray]:
    batches = [range(i, min(i + batch_size, len(texts))) for i in range(0, len(texts), batch_size)]

    def run(batch: range) -> np.ndarray:
        try:
            vectors = provider.embed_batch([texts[i] for i in batch])
        except ProviderError as e:
            raise EmbeddingError(f"{owner_ids[batch[0]]}..{owner_ids[batch[-1]]}: {e}") from e
        if vectors.shape != (len(batch), provider.dimension):
            raise EmbeddingError(
                f"{owner_ids[batch[0]]}: provider returned shape {vectors.shape}, "
                f"expected ({len(batch)}, {provider.dimension})"
            )
        return vectors

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as executor:
        results = list(executor.map(run, batches))
    rows = [row for block in results for row in block]
    return [normalize(row, owner_id) for row, owner_id in zip(rows, owner_ids)]


def embed_enriched(
    records: Sequence[EnrichedChunk],
    provider: BaseEmbedder,
    tfidf_model: TfidfModel,
    weights: FusionWeights = FusionWeights(),
    max_input_tokens: int = 2048,
    tokenizer: Optional[Tokenizer] = None,
    batch_size: int = 32,
    parallelism: int = 1,
    strategies: Sequence[EmbeddingStrategy] = tuple(EmbeddingStrategy),
) -> dict[EmbeddingStrategy, list[EmbeddingVector]]:
    """Vectors for every record under each requested strategy, in record order."""
    ids = [record.chunk_id for record in records]
    result: dict[EmbeddingStrategy, list[EmbeddingVector]] = {}

    content: list[EmbeddingVector] = []
    if EmbeddingStrategy.CONTENT in strategies or EmbeddingStrategy.TFIDF_WEIGHTED in strategies:
        texts = [canonical_text(record.chunk.text) for record in records]
        vectors = _embed_texts(provider, texts, ids, batch_size, parallelism)
        content = [EmbeddingVector(v, EmbeddingStrategy.CONTENT, i) for v, i in zip(vectors, ids)]
        logger.info(f"Embedded {len(content)} chunks (content)")
    if EmbeddingStrategy.CONTENT in strategies:
        result[EmbeddingStrategy.CONTENT] = content

    if EmbeddingStrategy.TFIDF_WEIGHTED in strategies:
        result[EmbeddingStrategy.TFIDF_WEIGHTED] = [
            fuse_tfidf(vector, metadata_text(record.metadata), tfidf_model, weights)
            for vector, record in zip(content, records)
        ]

    if EmbeddingStrategy.PREFIX_FUSION in strategies:
        texts = [prefixed_text(record, max_input_tokens, tokenizer) for record in records]
        vectors = _embed_texts(provider, texts, ids, batch_size, parallelism)
        result[EmbeddingStrategy.PREFIX_FUSION] = [
            EmbeddingVector(v, EmbeddingStrategy.PREFIX_FUSION, i) for v, i in zip(vectors, ids)
        ]
        logger.info(f"Embedded {len(records)} chunks (prefix fusion)")

    return result
