"""
Metadata TF-IDF and its projection into the embedding space.

The vocabulary is built from metadata text only. A V-dimensional tf-idf
vector is mapped to D dimensions by a seeded sparse sign projection: every
vocabulary row holds D/32 non-zeros of value +-1/sqrt(D) at positions drawn
without replacement. The projection preserves cosine similarity in
expectation, so projected metadata vectors can be mixed with content
embeddings in one index space.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from ragforge.chunking.tokenizer import word_tokens
from ragforge.errors import EmbeddingError
from ragforge.jsonl import read_json, write_json
from ragforge.metadata.models import ChunkMetadata, EnrichedChunk


logger = logging.getLogger(__name__)

TFIDF_FORMAT = "ragforge-tfidf"
TFIDF_VERSION = 1
PROJECTION_DENSITY_DIVISOR = 32


def metadata_text(metadata: ChunkMetadata) -> str:
    """Space-joined metadata fields that feed the TF-IDF vocabulary."""
    return " ".join(metadata.text_fields())


def smoothed_idf(n_chunks: int, df: int) -> float:
    return math.log((1 + n_chunks) / (1 + df)) + 1.0


@dataclass
class TfidfVector:
    """A projected tf-idf vector. ``empty`` marks the all-OOV zero vector."""
    values: np.ndarray
    empty: bool = False


@dataclass
class TfidfModel:
    """Fitted vocabulary, document frequencies and projection seed. Immutable after fit."""
    vocabulary: list[str]
    document_frequency: list[int]
    n_chunks: int
    projection_seed: int
    dimension: int
    term_index: dict[str, int] = field(init=False, repr=False)
    idf: np.ndarray = field(init=False, repr=False)
    projection: sp.csr_matrix = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.vocabulary) != len(self.document_frequency):
            raise ValueError("vocabulary and document_frequency lengths differ")
        if self.dimension < PROJECTION_DENSITY_DIVISOR:
            raise ValueError(f"dimension must be >= {PROJECTION_DENSITY_DIVISOR}, got {self.dimension}")
        self.term_index = {term: i for i, term in enumerate(self.vocabulary)}
        self.idf = np.array(
            [smoothed_idf(self.n_chunks, df) for df in self.document_frequency], dtype=np.float64
        )
        self.projection = build_projection(len(self.vocabulary), self.dimension, self.projection_seed)

    @property
    def vocabulary_size(self) -> int:
        return len(self.vocabulary)

    def weights(self, text: str) -> np.ndarray:
        """Raw term counts times idf in V-space; OOV terms ignored."""
        vector = np.zeros(len(self.vocabulary))
        for term, count in Counter(word_tokens(text)).items():
            i = self.term_index.get(term)
            if i is not None:
                vector[i] = count * self.idf[i]
        return vector

    def project(self, vector: np.ndarray) -> np.ndarray:
        """Map a V-dim vector (or rows of vectors) to D dims. No normalization."""
        return np.asarray(self.projection.T @ np.asarray(vector, dtype=np.float64).T).T

    def to_dict(self) -> dict:
        return {
            "format": TFIDF_FORMAT,
            "version": TFIDF_VERSION,
            "vocabulary": self.vocabulary,
            "document_frequency": self.document_frequency,
            "n_chunks": self.n_chunks,
            "projection_seed": self.projection_seed,
            "dimension": self.dimension,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TfidfModel":
        if data.get("format") != TFIDF_FORMAT or data.get("version") != TFIDF_VERSION:
            raise EmbeddingError(
                f"Unsupported TF-IDF model format {data.get('format')!r} version {data.get('version')!r}"
            )
        return cls(
            vocabulary=list(data["vocabulary"]),
            document_frequency=[int(df) for df in data["document_frequency"]],
            n_chunks=int(data["n_chunks"]),
            projection_seed=int(data["projection_seed"]),
            dimension=int(data["dimension"]),
        )


def build_projection(vocabulary_size: int, dimension: int, seed: int) -> sp.csr_matrix:
    """V x D sparse sign matrix; each row has dimension // 32 non-zeros."""
    rng = np.random.default_rng(seed)
    per_row = max(1, dimension // PROJECTION_DENSITY_DIVISOR)
    value = 1.0 / math.sqrt(dimension)

    indices = np.empty(vocabulary_size * per_row, dtype=np.int64)
    data = np.empty(vocabulary_size * per_row, dtype=np.float64)
    for row in range(vocabulary_size):
        start = row * per_row
        cols = np.sort(rng.choice(dimension, size=per_row, replace=False))
        signs = rng.integers(0, 2, size=per_row) * 2 - 1
        indices[start:start + per_row] = cols
        data[start:start + per_row] = signs * value
    indptr = np.arange(0, vocabulary_size * per_row + 1, per_row, dtype=np.int64)
    return sp.csr_matrix((data, indices, indptr), shape=(vocabulary_size, dimension))


def fit_tfidf(
    enriched: Iterable[EnrichedChunk],
    dimension: int,
    projection_seed: int = 13,
) -> TfidfModel:
    """Fit vocabulary and document frequencies over chunk metadata text."""
    documents = [set(word_tokens(metadata_text(record.metadata))) for record in enriched]
    if not documents:
        raise ValueError("fit_tfidf needs at least one enriched chunk")
    df: Counter[str] = Counter()
    for terms in documents:
        df.update(terms)
    if not df:
        raise EmbeddingError("empty metadata vocabulary")

    vocabulary = sorted(df)
    logger.info(f"TF-IDF vocabulary: {len(vocabulary)} terms over {len(documents)} chunks")
    return TfidfModel(
        vocabulary=vocabulary,
        document_frequency=[df[term] for term in vocabulary],
        n_chunks=len(documents),
        projection_seed=projection_seed,
        dimension=dimension,
    )


def tfidf_vector(text: str, model: TfidfModel) -> TfidfVector:
    """Projected, unit-norm tf-idf vector of ``text``; zero and flagged when all terms are OOV."""
    weights = model.weights(text)
    norm = np.linalg.norm(weights)
    if norm == 0:
        return TfidfVector(np.zeros(model.dimension), empty=True)
    projected = model.project(weights / norm)
    projected_norm = np.linalg.norm(projected)
    if projected_norm == 0:
        return TfidfVector(np.zeros(model.dimension), empty=True)
    return TfidfVector(projected / projected_norm)


def save_tfidf(path: Path, model: TfidfModel) -> None:
    write_json(path, model.to_dict())


def load_tfidf(path: Optional[Path]) -> TfidfModel:
    path = Path(path)
    if not path.exists():
        raise EmbeddingError(f"TF-IDF model not found: {path}")
    return TfidfModel.from_dict(read_json(path))
