"""Tests for embedding providers, metadata TF-IDF and the fusion strategies."""
import math

import numpy as np
import pytest

from ragforge.embedding import (
    EmbeddingStrategy,
    EmbeddingVector,
    FusionWeights,
    MockEmbedder,
    TfidfModel,
    build_projection,
    combine_weighted,
    embed_content,
    embed_enriched,
    embed_prefix_fusion,
    embed_tfidf_weighted,
    fit_tfidf,
    fuse_tfidf,
    load_tfidf,
    metadata_text,
    mock_embed,
    prefixed_text,
    render_prefix,
    save_tfidf,
    smoothed_idf,
    tfidf_vector,
)
from ragforge.chunking import get_tokenizer
from ragforge.errors import EmbeddingError
from ragforge.metadata import ChunkMetadata, EnrichedChunk
from conftest import make_chunk, make_enriched, words


def enriched_with(metadata: ChunkMetadata, text: str = "Enable versioning on the bucket.") -> EnrichedChunk:
    return EnrichedChunk(make_chunk(text), metadata, "mock")


def sample_metadata(**overrides) -> ChunkMetadata:
    data = dict(
        content_type="procedural",
        primary_category="storage",
        intents=["how-to"],
        keywords=["bucket", "versioning"],
        summary="Enable versioning.",
    )
    data.update(overrides)
    return ChunkMetadata(**data)


@pytest.fixture
def records():
    texts = [
        "Open the console. Enable bucket versioning.",
        "Warning: deleting a bucket removes every object.",
        "The cache service keeps hot keys in memory.",
        "For example, run `opsctl backup create` nightly.",
    ]
    return [make_enriched(text, chunk_id=f"guide/doc.md#{i}") for i, text in enumerate(texts)]


# content embeddings

def test_content_embedding_is_deterministic_and_unit(embedder):
    first = embed_content("Enable bucket versioning.", embedder, "c1")
    second = embed_content("Enable bucket versioning.", embedder, "c1")
    np.testing.assert_array_equal(first.values, second.values)
    assert np.linalg.norm(first.values) == pytest.approx(1.0)
    assert first.strategy == EmbeddingStrategy.CONTENT


def test_whitespace_is_canonicalized(embedder):
    a = embed_content("Enable   bucket\n\nversioning.", embedder)
    b = embed_content("  Enable bucket versioning. ", embedder)
    np.testing.assert_array_equal(a.values, b.values)


def test_empty_text_cannot_be_embedded(embedder):
    with pytest.raises(ValueError):
        embed_content("  \n", embedder, "c1")


def test_mock_embed_ignores_token_order():
    np.testing.assert_array_equal(mock_embed("alpha beta gamma", 64, 7), mock_embed("gamma alpha beta", 64, 7))


def test_mock_embed_disjoint_texts_are_nearly_orthogonal():
    a = mock_embed("bucket versioning lifecycle policy retention", 1536, 7)
    b = mock_embed("kernel scheduler interrupt thread priority", 1536, 7)
    assert abs(float(a @ b)) < 0.2


def test_mock_embedder_rejects_tiny_dimension():
    with pytest.raises(ValueError):
        MockEmbedder(dimension=4)


# tf-idf

def test_smoothed_idf():
    assert smoothed_idf(2, 1) == pytest.approx(math.log(3 / 2) + 1.0)
    assert smoothed_idf(2, 1) == pytest.approx(1.405465, abs=1e-6)
    assert smoothed_idf(10, 10) == pytest.approx(1.0)


def test_vocabulary_is_sorted_with_document_frequencies(records):
    model = fit_tfidf(records, dimension=128)
    assert model.vocabulary == sorted(model.vocabulary)
    assert model.n_chunks == 4
    # every chunk's intents field contributes at least one term
    assert max(model.document_frequency) <= 4
    assert all(df >= 1 for df in model.document_frequency)


def test_fit_needs_records():
    with pytest.raises(ValueError):
        fit_tfidf([], dimension=128)


def test_out_of_vocabulary_text_gives_flagged_zero_vector(records):
    model = fit_tfidf(records, dimension=128)
    vector = tfidf_vector("zzzunknown qqqmissing", model)
    assert vector.empty
    assert not vector.values.any()


def test_single_term_vector_is_unit(records):
    model = fit_tfidf(records, dimension=128)
    vector = tfidf_vector(model.vocabulary[0], model)
    assert not vector.empty
    assert np.linalg.norm(vector.values) == pytest.approx(1.0)


def test_projection_seed_matters():
    a = build_projection(50, 128, seed=13)
    b = build_projection(50, 128, seed=14)
    assert (a != b).nnz > 0
    assert (build_projection(50, 128, seed=13) != a).nnz == 0


def test_projection_row_shape():
    projection = build_projection(10, 256, seed=13)
    assert projection.shape == (10, 256)
    assert all(n == 256 // 32 for n in np.diff(projection.indptr))
    np.testing.assert_allclose(np.abs(projection.data), 1 / math.sqrt(256))


def test_projection_preserves_cosine(rng):
    projection = build_projection(300, 1536, seed=13).toarray()
    x = rng.standard_normal((1000, 300))
    y = x + rng.standard_normal((1000, 300))

    def cosines(a, b):
        return np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))

    errors = np.abs(cosines(x @ projection, y @ projection) - cosines(x, y))
    assert errors.mean() <= 0.05


def test_model_round_trip(records, tmp_path):
    model = fit_tfidf(records, dimension=128, projection_seed=5)
    save_tfidf(tmp_path / "tfidf.json", model)
    loaded = load_tfidf(tmp_path / "tfidf.json")
    assert loaded.to_dict() == model.to_dict()
    text = "bucket versioning cache"
    np.testing.assert_array_equal(tfidf_vector(text, loaded).values, tfidf_vector(text, model).values)


def test_model_rejects_small_dimension():
    with pytest.raises(ValueError):
        TfidfModel(["a"], [1], 1, 13, 16)


def test_missing_model_file(tmp_path):
    with pytest.raises(EmbeddingError, match="not found"):
        load_tfidf(tmp_path / "nope.json")


# weighted fusion

def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        FusionWeights(0.6, 0.3)
    with pytest.raises(ValueError):
        FusionWeights(1.2, -0.2)


def test_combine_orthogonal_unit_vectors():
    content = np.zeros(8)
    content[0] = 1.0
    metadata = np.zeros(8)
    metadata[1] = 1.0
    combined = combine_weighted(content, metadata, FusionWeights())
    assert np.linalg.norm(combined) == pytest.approx(math.sqrt(0.58))
    assert np.linalg.norm(combined) == pytest.approx(0.76158, abs=1e-5)


def test_extreme_weights(records, embedder):
    model = fit_tfidf(records, dimension=128)
    record = records[0]
    content = embed_content(record.chunk.text, embedder, record.chunk_id)

    only_content = embed_tfidf_weighted(record, embedder, model, FusionWeights(1.0, 0.0))
    np.testing.assert_allclose(only_content.values, content.values)

    only_metadata = embed_tfidf_weighted(record, embedder, model, FusionWeights(0.0, 1.0))
    expected = tfidf_vector(metadata_text(record.metadata), model).values
    np.testing.assert_allclose(only_metadata.values, expected)


def test_weighted_vector_is_unit(records, embedder):
    model = fit_tfidf(records, dimension=128)
    vector = embed_tfidf_weighted(records[1], embedder, model)
    assert vector.strategy == EmbeddingStrategy.TFIDF_WEIGHTED
    assert np.linalg.norm(vector.values) == pytest.approx(1.0)


def test_out_of_vocabulary_metadata_keeps_content(records, embedder):
    model = fit_tfidf(records, dimension=128)
    content = embed_content("anything", embedder, "q1")
    fused = fuse_tfidf(content, "zzzunknown", model, FusionWeights())
    np.testing.assert_array_equal(fused.values, content.values)


def test_projection_dimension_must_match(records):
    model = fit_tfidf(records, dimension=64)
    content = EmbeddingVector(np.eye(128)[0], EmbeddingStrategy.CONTENT, "c1")
    with pytest.raises(EmbeddingError, match="dimension"):
        fuse_tfidf(content, "bucket", model, FusionWeights())


# prefix fusion

def test_render_prefix():
    assert render_prefix(sample_metadata()) == (
        "[category: storage | type: procedural | intents: how-to | keywords: bucket, versioning]\n"
        "Enable versioning.\n---\n"
    )


def test_render_prefix_without_keywords():
    assert "keywords: -]" in render_prefix(sample_metadata(keywords=[]))


def test_prefix_changes_the_vector(embedder):
    record = enriched_with(sample_metadata())
    content = embed_content(record.chunk.text, embedder, record.chunk_id)
    fused = embed_prefix_fusion(record, embedder)
    assert fused.strategy == EmbeddingStrategy.PREFIX_FUSION
    assert not np.allclose(fused.values, content.values)
    assert np.linalg.norm(fused.values) == pytest.approx(1.0)


def test_chunk_text_is_cut_to_the_input_budget():
    record = enriched_with(sample_metadata(), text=words(500))
    text = prefixed_text(record, max_input_tokens=100)
    assert text.startswith(render_prefix(record.metadata))
    assert get_tokenizer().count(text) == 100


def test_prefix_over_budget_is_an_error(embedder):
    with pytest.raises(EmbeddingError, match="prefix"):
        embed_prefix_fusion(enriched_with(sample_metadata()), embedder, max_input_tokens=5)


# batch encoder

def test_embed_enriched_matches_single_record_paths(records, embedder):
    model = fit_tfidf(records, dimension=128)
    vectors = embed_enriched(records, embedder, model, batch_size=3, parallelism=2)

    assert set(vectors) == set(EmbeddingStrategy)
    for strategy, rows in vectors.items():
        assert [v.owner_id for v in rows] == [r.chunk_id for r in records]
        assert all(v.strategy == strategy for v in rows)

    np.testing.assert_allclose(
        vectors[EmbeddingStrategy.CONTENT][2].values,
        embed_content(records[2].chunk.text, embedder).values,
    )
    np.testing.assert_allclose(
        vectors[EmbeddingStrategy.TFIDF_WEIGHTED][0].values,
        embed_tfidf_weighted(records[0], embedder, model).values,
    )
    np.testing.assert_allclose(
        vectors[EmbeddingStrategy.PREFIX_FUSION][3].values,
        embed_prefix_fusion(records[3], embedder).values,
    )


def test_embed_enriched_subset_of_strategies(records, embedder):
    model = fit_tfidf(records, dimension=128)
    vectors = embed_enriched(records, embedder, model, strategies=[EmbeddingStrategy.PREFIX_FUSION])
    assert list(vectors) == [EmbeddingStrategy.PREFIX_FUSION]
