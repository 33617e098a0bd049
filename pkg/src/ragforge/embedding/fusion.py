"""Chunk and query embeddings under the three embedding strategies."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from ragforge.chunking.tokenizer import Tokenizer, get_tokenizer
from ragforge.errors import EmbeddingError, ProviderError
from ragforge.metadata.models import ChunkMetadata, EnrichedChunk
from .providers import BaseEmbedder
from .tfidf import TfidfModel, metadata_text, tfidf_vector


logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6


class EmbeddingStrategy(str, Enum):
    """How chunk content and metadata are encoded."""
    CONTENT = "content"
    TFIDF_WEIGHTED = "tfidf_weighted"
    PREFIX_FUSION = "prefix_fusion"

    @property
    def label(self) -> str:
        return {"content": "Content", "tfidf_weighted": "TF-IDF", "prefix_fusion": "Prefix-Fusion"}[self.value]


@dataclass
class EmbeddingVector:
    values: np.ndarray
    strategy: EmbeddingStrategy
    owner_id: str  # chunk_id or query_id


@dataclass(frozen=True)
class FusionWeights:
    content_weight: float = 0.7
    metadata_weight: float = 0.3

    def __post_init__(self):
        if self.content_weight < 0 or self.metadata_weight < 0:
            raise ValueError("fusion weights must be >= 0")
        if abs(self.content_weight + self.metadata_weight - 1.0) > 1e-9:
            raise ValueError(
                f"fusion weights must sum to 1, got {self.content_weight} + {self.metadata_weight}"
            )


def normalize(vector: np.ndarray, owner_id: str = "") -> np.ndarray:
    vector = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(vector)
    if not np.isfinite(norm) or norm == 0:
        raise EmbeddingError(f"{owner_id}: cannot normalize a zero or non-finite vector")
    return vector / norm


def canonical_text(text: str) -> str:
    """Collapse whitespace runs and trim."""
    return " ".join(text.split())


def embed_text(provider: BaseEmbedder, text: str, owner_id: str) -> np.ndarray:
    try:
        vector = provider.embed(text)
    except ProviderError as e:
        raise EmbeddingError(f"{owner_id}: {e}") from e
    if len(vector) != provider.dimension:
        raise EmbeddingError(f"{owner_id}: provider returned {len(vector)} dims, expected {provider.dimension}")
    return normalize(vector, owner_id)


def embed_content(text: str, provider: BaseEmbedder, owner_id: str = "") -> EmbeddingVector:
    """Plain content embedding, unit norm."""
    if not text.strip():
        raise ValueError(f"{owner_id}: text is empty")
    values = embed_text(provider, canonical_text(text), owner_id)
    return EmbeddingVector(values, EmbeddingStrategy.CONTENT, owner_id)


def combine_weighted(content: np.ndarray, metadata: np.ndarray, weights: FusionWeights) -> np.ndarray:
    """w_c * content + w_m * metadata, before renormalization."""
    if content.shape != metadata.shape:
        raise EmbeddingError(
            f"dimension mismatch: content {content.shape[-1]} vs metadata {metadata.shape[-1]}"
        )
    return weights.content_weight * content + weights.metadata_weight * metadata


def fuse_tfidf(
    content: EmbeddingVector,
    text: str,
    model: TfidfModel,
    weights: FusionWeights,
) -> EmbeddingVector:
    """Mix a unit content vector with the projected tf-idf vector of ``text``."""
    tfidf = tfidf_vector(text, model)
    if tfidf.empty:
        logger.debug(f"{content.owner_id}: no in-vocabulary metadata terms, using content vector")
        return EmbeddingVector(content.values, EmbeddingStrategy.TFIDF_WEIGHTED, content.owner_id)
    if model.dimension != len(content.values):
        raise EmbeddingError(
            f"{content.owner_id}: projection dimension {model.dimension} "
            f"!= embedding dimension {len(content.values)}"
        )
    combined = combine_weighted(content.values, tfidf.values, weights)
    return EmbeddingVector(normalize(combined, content.owner_id), EmbeddingStrategy.TFIDF_WEIGHTED, content.owner_id)


def embed_tfidf_weighted(
    enriched: EnrichedChunk,
    provider: BaseEmbedder,
    model: TfidfModel,
    weights: FusionWeights = FusionWeights(),
    content: Optional[EmbeddingVector] = None,
) -> EmbeddingVector:
    """Content embedding mixed with the chunk's metadata tf-idf vector."""
    content = content or embed_content(enriched.chunk.text, provider, enriched.chunk_id)
    return fuse_tfidf(content, metadata_text(enriched.metadata), model, weights)


def _csv(values: list) -> str:
    return ", ".join(str(getattr(v, "value", v)) for v in values) if values else "-"


def render_prefix(metadata: ChunkMetadata) -> str:
    """Metadata header prepended to chunk text for prefix fusion."""
    return (
        f"[category: {metadata.primary_category} | type: {metadata.content_type.value} | "
        f"intents: {_csv(metadata.intents)} | keywords: {_csv(metadata.keywords)}]\n"
        f"{metadata.summary}\n---\n"
    )


def prefixed_text(
    enriched: EnrichedChunk,
    max_input_tokens: int,
    tokenizer: Optional[Tokenizer] = None,
) -> str:
    """Prefix plus chunk text, with the text cut to fit ``max_input_tokens``."""
    tokenizer = tokenizer or get_tokenizer()
    prefix = render_prefix(enriched.metadata)
    prefix_tokens = tokenizer.count(prefix)
    if prefix_tokens > max_input_tokens:
        raise EmbeddingError(
            f"{enriched.chunk_id}: metadata prefix is {prefix_tokens} tokens, "
            f"over the {max_input_tokens}-token input budget"
        )
    text = tokenizer.truncate(enriched.chunk.text, max_input_tokens - prefix_tokens)
    if len(text) < len(enriched.chunk.text):
        logger.debug(f"{enriched.chunk_id}: chunk text truncated to fit the prefix")
    return prefix + text


def embed_prefix_fusion(
    enriched: EnrichedChunk,
    provider: BaseEmbedder,
    max_input_tokens: int = 2048,
    tokenizer: Optional[Tokenizer] = None,
) -> EmbeddingVector:
    """Embed the metadata prefix and chunk text as one input."""
    text = prefixed_text(enriched, max_input_tokens, tokenizer)
    values = embed_text(provider, text, enriched.chunk_id)
    return EmbeddingVector(values, EmbeddingStrategy.PREFIX_FUSION, enriched.chunk_id)
