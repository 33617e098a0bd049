"""Exact cosine-similarity vector index."""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ragforge.chunking.models import ChunkingStrategy
from ragforge.embedding.fusion import EmbeddingStrategy, EmbeddingVector


logger = logging.getLogger(__name__)

UNIT_NORM_TOLERANCE = 1e-5
NN_BLOCK_ROWS = 1024


@dataclass
class SearchHit:
    """Result from vector search."""
    chunk_id: str
    score: float


@dataclass
class NeighborStats:
    """Distribution of each vector's cosine distance to its nearest other vector."""
    count: int
    avg_nn_distance: float
    min: float
    p25: float
    median: float
    p75: float
    max: float

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "avg_nn_distance": self.avg_nn_distance,
            "min": self.min,
            "p25": self.p25,
            "median": self.median,
            "p75": self.p75,
            "max": self.max,
        }


@dataclass
class VectorIndex:
    """
    Immutable in-memory index of unit vectors.

    Vectors are stored as float32; dot products accumulate in float64.
    Concurrent searches are safe.
    """
    ids: list[str]
    matrix: np.ndarray
    chunking_strategy: Optional[ChunkingStrategy] = None
    embedding_strategy: Optional[EmbeddingStrategy] = None
    positions: dict[str, int] = field(init=False, repr=False)
    _id_rank: np.ndarray = field(init=False, repr=False)
    _matrix64: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.ids):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match {len(self.ids)} ids"
            )
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float32)
        self.matrix.setflags(write=False)
        self.positions = {}
        for position, chunk_id in enumerate(self.ids):
            if chunk_id in self.positions:
                raise ValueError(f"Duplicate chunk_id in index: {chunk_id}")
            self.positions[chunk_id] = position
        # rank of each id in ascending id order, used as the tie-break key
        order = np.argsort(np.array(self.ids, dtype=object), kind="stable")
        self._id_rank = np.empty(len(self.ids), dtype=np.int64)
        self._id_rank[order] = np.arange(len(self.ids))
        self._matrix64 = self.matrix.astype(np.float64)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]

    @property
    def cell(self) -> str:
        chunking = self.chunking_strategy.value if self.chunking_strategy else "?"
        embedding = self.embedding_strategy.value if self.embedding_strategy else "?"
        return f"{chunking}+{embedding}"

    def __len__(self) -> int:
        return len(self.ids)

    def vector(self, chunk_id: str) -> np.ndarray:
        return self._matrix64[self.positions[chunk_id]]

    def scores(self, query: np.ndarray) -> np.ndarray:
        """Cosine similarity of the query against every entry, in insertion order."""
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.dimension,):
            raise ValueError(f"query dimension {query.shape} != index dimension {self.dimension}")
        norm = np.linalg.norm(query)
        if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
            raise ValueError(f"query vector must be unit norm, got {norm:.6f}")
        return np.clip(self._matrix64 @ query, -1.0, 1.0)

    def search(self, query: np.ndarray, k: int) -> list[SearchHit]:
        """Top-k by descending cosine; equal scores ordered by ascending chunk_id."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        scores = self.scores(query)
        order = np.lexsort((self._id_rank, -scores))[:k]
        return [SearchHit(self.ids[i], float(scores[i])) for i in order]


def build_index(
    vectors: Sequence[EmbeddingVector],
    chunking_strategy: Optional[ChunkingStrategy] = None,
    embedding_strategy: Optional[EmbeddingStrategy] = None,
) -> VectorIndex:
    """Index vectors in insertion order."""
    if not vectors:
        raise ValueError("Cannot build an index from zero vectors")
    dimension = len(vectors[0].values)
    seen: set[str] = set()
    for vector in vectors:
        if len(vector.values) != dimension:
            raise ValueError(
                f"Dimension mismatch for {vector.owner_id}: {len(vector.values)} != {dimension}"
            )
        if vector.owner_id in seen:
            raise ValueError(f"Duplicate chunk_id in index: {vector.owner_id}")
        seen.add(vector.owner_id)
    if embedding_strategy is None:
        embedding_strategy = vectors[0].strategy

    index = VectorIndex(
        ids=[vector.owner_id for vector in vectors],
        matrix=np.vstack([vector.values for vector in vectors]),
        chunking_strategy=chunking_strategy,
        embedding_strategy=embedding_strategy,
    )
    logger.debug(f"Built index {index.cell}: {len(index)} vectors, dimension {dimension}")
    return index


def search(index: VectorIndex, query_vector: np.ndarray, k: int) -> list[SearchHit]:
    return index.search(query_vector, k)


def nn_stats(index: VectorIndex) -> NeighborStats:
    """Nearest-other-vector cosine distance (1 - cos) for every entry."""
    n = len(index)
    if n < 2:
        raise ValueError(f"nn_stats needs at least 2 vectors, index {index.cell} has {n}")
    matrix = index._matrix64
    nearest = np.empty(n)
    for start in range(0, n, NN_BLOCK_ROWS):
        stop = min(start + NN_BLOCK_ROWS, n)
        sims = matrix[start:stop] @ matrix.T
        sims[np.arange(stop - start), np.arange(start, stop)] = -np.inf
        nearest[start:stop] = sims.max(axis=1)
    distances = np.clip(1.0 - nearest, 0.0, 2.0)
    p25, median, p75 = np.percentile(distances, [25, 50, 75])
    return NeighborStats(
        count=n,
        avg_nn_distance=float(distances.mean()),
        min=float(distances.min()),
        p25=float(p25),
        median=float(median),
        p75=float(p75),
        max=float(distances.max()),
    )
