"""Exact vector index, persistence and clustering statistics."""
from .vector_index import NeighborStats, SearchHit, VectorIndex, build_index, nn_stats, search
from .persistence import INDEX_VERSION, load_index, save_index

__all__ = [
    "NeighborStats", "SearchHit", "VectorIndex", "build_index", "nn_stats", "search",
    "INDEX_VERSION", "load_index", "save_index",
]
