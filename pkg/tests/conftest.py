"""Shared fixtures."""
from pathlib import Path

import numpy as np
import pytest

from ragforge.chunking import ChunkingStrategy, ChunkRecord
from ragforge.config import PipelineConfig
from ragforge.corpus import Document
from ragforge.embedding import FusionWeights, MockEmbedder, embed_enriched, fit_tfidf
from ragforge.fixtures import write_fixture
from ragforge.index import build_index
from ragforge.metadata import EnrichedChunk, mock_enrich
from ragforge.pipeline import Pipeline
from ragforge.retrieval import cell_name


def make_doc(body: str, doc_id: str = "guide/doc.md", source_tag: str = "guide") -> Document:
    return Document(doc_id=doc_id, title="doc", source_path="doc.md", body=body, source_tag=source_tag)


def make_chunk(
    text: str,
    chunk_id: str = "guide/doc.md#0",
    strategy: ChunkingStrategy = ChunkingStrategy.RECURSIVE,
    source_tag: str = "guide",
) -> ChunkRecord:
    return ChunkRecord(
        chunk_id=chunk_id,
        doc_id=chunk_id.rsplit("#", 1)[0],
        strategy=strategy,
        text=text,
        token_count=len(text.split()),
        char_span=(0, len(text)),
        source_tag=source_tag,
    )


def make_enriched(text: str, chunk_id: str = "guide/doc.md#0", source_tag: str = "guide") -> EnrichedChunk:
    chunk = make_chunk(text, chunk_id, source_tag=source_tag)
    return EnrichedChunk(chunk, mock_enrich(chunk), "mock")


def words(n: int, prefix: str = "w") -> str:
    """n distinct single-token words."""
    return " ".join(f"{prefix}{i}" for i in range(n))


@pytest.fixture
def embedder() -> MockEmbedder:
    return MockEmbedder(dimension=128, seed=7)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def fixture_dir(tmp_path: Path) -> Path:
    """A freshly written synthetic corpus with its mock config."""
    write_fixture(tmp_path / "fixture")
    return tmp_path / "fixture"


@pytest.fixture(scope="session")
def completed_workspace(tmp_path_factory) -> Path:
    """The synthetic corpus run through every stage once; returns the fixture dir."""
    root = tmp_path_factory.mktemp("completed") / "fixture"
    summary = write_fixture(root)
    Pipeline(PipelineConfig.load(summary.config_path)).run_all()
    return root


MATRIX_TEXTS = (
    "Open the console and enable bucket versioning.",
    "Warning: deleting a bucket removes every stored object.",
    "The cache service keeps hot keys in memory for fast reads.",
    "For example, run `opsctl backup create` every night.",
    "Fix the CACHE_TIMEOUT error by raising the client timeout.",
    "Snapshots and backups differ in retention and restore speed.",
)


def build_matrix(embedder, texts=MATRIX_TEXTS, weights=FusionWeights(), metadata_for=mock_enrich):
    """
    Indexes for all nine cells plus TF-IDF models and chunk texts per chunking strategy.

    ``metadata_for`` maps a chunk to its metadata; ``weights`` feed the
    tfidf_weighted cells.
    """
    indexes, models, chunk_texts = {}, {}, {}
    for chunking in ChunkingStrategy:
        records = []
        for i, text in enumerate(texts):
            chunk = make_chunk(text, chunk_id=f"{chunking.value}/doc{i}.md#0", strategy=chunking)
            records.append(EnrichedChunk(chunk, metadata_for(chunk), "mock"))
        models[chunking] = fit_tfidf(records, dimension=embedder.dimension)
        vectors = embed_enriched(records, embedder, models[chunking], weights)
        for embedding, rows in vectors.items():
            indexes[cell_name(chunking, embedding)] = build_index(rows, chunking, embedding)
        chunk_texts[chunking] = {record.chunk_id: record.chunk.text for record in records}
    return indexes, models, chunk_texts
