"""Chunk and query embeddings: content, TF-IDF weighted and prefix fusion."""
from .providers import BaseEmbedder, HttpEmbedder, MockEmbedder, get_embedder, mock_embed
from .tfidf import (
    TfidfModel,
    TfidfVector,
    build_projection,
    fit_tfidf,
    load_tfidf,
    metadata_text,
    save_tfidf,
    smoothed_idf,
    tfidf_vector,
)
from .fusion import (
    EmbeddingStrategy,
    EmbeddingVector,
    FusionWeights,
    canonical_text,
    combine_weighted,
    embed_content,
    embed_prefix_fusion,
    embed_tfidf_weighted,
    fuse_tfidf,
    normalize,
    prefixed_text,
    render_prefix,
)
from .encoder import embed_enriched

__all__ = [
    "BaseEmbedder", "HttpEmbedder", "MockEmbedder", "get_embedder", "mock_embed",
    "TfidfModel", "TfidfVector", "build_projection", "fit_tfidf", "load_tfidf",
    "metadata_text", "save_tfidf", "smoothed_idf", "tfidf_vector",
    "EmbeddingStrategy", "EmbeddingVector", "FusionWeights", "canonical_text",
    "combine_weighted", "embed_content", "embed_prefix_fusion", "embed_tfidf_weighted",
    "fuse_tfidf", "normalize", "prefixed_text", "render_prefix",
    "embed_enriched",
]
