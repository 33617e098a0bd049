"""Tests for the naive, recursive and semantic chunkers."""
import numpy as np
import pytest

from ragforge.chunking import (
    ChunkingConfig,
    ChunkingStrategy,
    ChunkStats,
    SemanticChunker,
    chunk_coherence,
    chunk_corpus,
    chunk_naive,
    chunk_recursive,
    chunk_semantic,
    coherence,
    compare_chunk_counts,
    get_tokenizer,
    load_chunks,
    save_chunks,
    sentence_spans,
)
from ragforge.corpus import Corpus
from ragforge.embedding import MockEmbedder
from ragforge.errors import ChunkingError
from ragforge.fixtures import build_documents, fixture_config
from conftest import make_doc, words


NAIVE = ChunkingConfig(ChunkingStrategy.NAIVE, max_tokens=1024)
RECURSIVE = ChunkingConfig(ChunkingStrategy.RECURSIVE, max_tokens=512, overlap_tokens=128)
SEMANTIC = ChunkingConfig(ChunkingStrategy.SEMANTIC, max_tokens=1024)

tokenizer = get_tokenizer()


def random_document(rng: np.random.Generator, index: int):
    vocabulary = [f"term{i}" for i in range(300)]
    paragraphs = []
    for _ in range(rng.integers(1, 8)):
        sentences = []
        for _ in range(rng.integers(1, 12)):
            length = int(rng.integers(3, 60))
            sentences.append(" ".join(rng.choice(vocabulary, size=length)) + ".")
        paragraphs.append(" ".join(sentences))
    return make_doc("\n\n".join(paragraphs), doc_id=f"guide/doc{index}.md")


@pytest.fixture(scope="module")
def random_corpus():
    rng = np.random.default_rng(4321)
    return [random_document(rng, i) for i in range(200)]


@pytest.fixture(scope="module")
def fixture_corpus() -> Corpus:
    docs = [
        make_doc(body, doc_id=f"{tag}/{name}", source_tag=tag)
        for tag, files in build_documents().items()
        for name, body in files
    ]
    return Corpus("synthetic", docs)


def fixture_chunking(strategy: ChunkingStrategy) -> ChunkingConfig:
    return ChunkingConfig(strategy, **fixture_config()["chunking"][strategy.value])


# naive

def test_naive_short_document_is_one_chunk():
    chunks = chunk_naive(make_doc(words(1000)), NAIVE)
    assert [c.token_count for c in chunks] == [1000]


def test_naive_window_arithmetic():
    chunks = chunk_naive(make_doc(words(2500)), NAIVE)
    assert [c.token_count for c in chunks] == [1024, 1024, 452]
    assert [c.chunk_id for c in chunks] == ["guide/doc.md#0", "guide/doc.md#1", "guide/doc.md#2"]


def test_naive_empty_document():
    assert chunk_naive(make_doc(""), NAIVE) == []


def test_naive_reconstructs_token_sequence(rng, random_corpus):
    for doc in random_corpus:
        cfg = ChunkingConfig(ChunkingStrategy.NAIVE, max_tokens=int(rng.integers(5, 200)))
        chunks = chunk_naive(doc, cfg)
        rebuilt = [token for c in chunks for token in tokenizer.tokenize(c.text)]
        assert rebuilt == tokenizer.tokenize(doc.body)
        assert all(c.token_count <= cfg.max_tokens for c in chunks)


def test_chunk_spans_point_into_the_body(rng):
    doc = random_document(rng, 0)
    for chunk in chunk_naive(doc, ChunkingConfig(ChunkingStrategy.NAIVE, max_tokens=50)):
        start, end = chunk.char_span
        assert doc.body[start:end] == chunk.text


# recursive

def test_recursive_whole_document_fits():
    body = "\n\n".join(words(100, prefix=f"p{i}x") for i in range(4))
    chunks = chunk_recursive(make_doc(body), RECURSIVE)
    assert len(chunks) == 1
    assert chunks[0].token_count == 400


def test_recursive_single_sentence_slides_by_stride():
    chunks = chunk_recursive(make_doc(words(1000)), RECURSIVE)
    assert [c.token_count for c in chunks] == [512, 512, 232]
    assert [tokenizer.tokenize(c.text)[0] for c in chunks] == ["w0", "w384", "w768"]


def test_recursive_two_paragraphs_carry_overlap():
    first = words(400, prefix="a")
    second = words(400, prefix="b")
    chunks = chunk_recursive(make_doc(f"{first}\n\n{second}"), RECURSIVE)

    assert chunks[0].text == first
    assert tokenizer.tokenize(chunks[1].text)[:128] == tokenizer.tokenize(first)[-128:]
    assert all(c.token_count <= 512 for c in chunks)
    assert tokenizer.tokenize(chunks[-1].text)[-1] == "b399"


def test_recursive_invariants_on_random_documents(random_corpus):
    for doc in random_corpus:
        chunks = chunk_recursive(doc, RECURSIVE)
        assert all(c.token_count <= 512 for c in chunks)
        for previous, current in zip(chunks, chunks[1:]):
            tail = tokenizer.tokenize(previous.text)[-128:]
            assert tokenizer.tokenize(current.text)[:len(tail)] == tail
        # every token of the document is covered
        if chunks:
            assert chunks[0].char_span[0] == tokenizer.spans(doc.body)[0][0]
            assert chunks[-1].char_span[1] == tokenizer.spans(doc.body)[-1][1]


def test_recursive_long_token_never_errors():
    doc = make_doc("x" * 5000)
    chunks = chunk_recursive(doc, ChunkingConfig(ChunkingStrategy.RECURSIVE, max_tokens=4, overlap_tokens=1))
    assert len(chunks) == 1


def test_config_rejects_overlap_not_below_max():
    with pytest.raises(ValueError, match="overlap_tokens"):
        ChunkingConfig(ChunkingStrategy.RECURSIVE, max_tokens=128, overlap_tokens=128)


# semantic

def topic_embedder(sentences):
    vectors = []
    for sentence in sentences:
        vector = np.zeros(4)
        vector[0 if "alpha" in sentence else 1] = 1.0
        vectors.append(vector)
    return np.array(vectors)


def test_semantic_breaks_between_orthogonal_topics():
    body = " ".join(["alpha topic sentence here."] * 5 + ["beta topic sentence here."] * 5)
    chunks = chunk_semantic(make_doc(body), SEMANTIC, topic_embedder)
    assert len(chunks) == 2
    assert "beta" not in chunks[0].text
    assert "alpha" not in chunks[1].text
    assert chunks[0].coherence == pytest.approx(1.0)


def test_semantic_equal_similarities_split_only_by_size():
    body = " ".join(["alpha b c d."] * 10)
    cfg = ChunkingConfig(ChunkingStrategy.SEMANTIC, max_tokens=12)
    chunks = chunk_semantic(make_doc(body), cfg, lambda sentences: np.ones((len(sentences), 4)))
    assert [c.token_count for c in chunks] == [10] * 5


def test_semantic_single_sentence():
    chunks = chunk_semantic(make_doc("Only one sentence here."), SEMANTIC, topic_embedder)
    assert len(chunks) == 1
    assert chunks[0].coherence == 1.0


def test_semantic_dimension_change_is_an_error():
    calls = []

    def unstable(sentences):
        calls.append(1)
        return np.ones((len(sentences), 4 + len(calls)))

    chunker = SemanticChunker(SEMANTIC, unstable)
    chunker.chunk(make_doc("One. Two."))
    with pytest.raises(ChunkingError, match="dimension changed"):
        chunker.chunk(make_doc("Three. Four."))


def test_semantic_size_bound_on_random_documents(random_corpus, embedder):
    cfg = ChunkingConfig(ChunkingStrategy.SEMANTIC, max_tokens=120, min_tokens=20)
    for doc in random_corpus:
        chunks = chunk_semantic(doc, cfg, embedder)
        assert all(c.token_count <= 120 for c in chunks)
        assert all(-1.0 <= c.coherence <= 1.0 for c in chunks)


def test_semantic_is_deterministic(rng, embedder):
    doc = random_document(rng, 0)
    assert chunk_semantic(doc, SEMANTIC, embedder) == chunk_semantic(doc, SEMANTIC, embedder)


def test_coherence_of_identical_vectors():
    assert coherence(np.ones((3, 8))) == pytest.approx(1.0)
    assert chunk_coherence("alpha one. alpha two. alpha three.", topic_embedder) == pytest.approx(1.0)


def test_sentence_spans_trim_whitespace():
    text = "  First one.  Second?\nThird  "
    assert [text[s:e] for s, e in sentence_spans(text)] == ["First one.", "Second?", "Third"]


# corpus level

def test_chunk_corpus_identical_documents():
    corpus = Corpus("c", [make_doc(words(100), doc_id=f"guide/{i}.md") for i in range(10)])
    chunk_set = chunk_corpus(corpus, NAIVE)
    assert len(chunk_set) == 10
    assert chunk_set.stats.mean_tokens == 100
    assert chunk_set.stats.chunks_per_document == 1.0


def test_smaller_windows_give_more_chunks(rng):
    corpus = Corpus("c", [random_document(rng, i) for i in range(20)])
    naive = chunk_corpus(corpus, NAIVE)
    recursive = chunk_corpus(corpus, RECURSIVE)
    assert len(recursive) >= len(naive)


def test_empty_corpus_gives_zero_stats():
    chunk_set = chunk_corpus(Corpus("empty"), NAIVE)
    assert len(chunk_set) == 0
    assert chunk_set.stats == ChunkStats(ChunkingStrategy.NAIVE)


def test_parallel_chunking_keeps_corpus_order(rng, embedder):
    corpus = Corpus("c", [random_document(rng, i) for i in range(12)])
    serial = chunk_corpus(corpus, SEMANTIC, embedder=embedder)
    parallel = chunk_corpus(corpus, SEMANTIC, embedder=embedder, parallelism=4)
    assert serial.chunks == parallel.chunks


@pytest.mark.parametrize("strategy", list(ChunkingStrategy))
def test_bundled_corpus_chunk_invariants(fixture_corpus, strategy):
    cfg = fixture_chunking(strategy)
    chunk_set = chunk_corpus(fixture_corpus, cfg, embedder=MockEmbedder(dimension=256, seed=7))
    bodies = {doc.doc_id: doc.body for doc in fixture_corpus.documents}
    assert {c.doc_id for c in chunk_set.chunks} == set(bodies)

    for chunk in chunk_set.chunks:
        assert chunk.token_count <= cfg.max_tokens
        start, end = chunk.char_span
        assert bodies[chunk.doc_id][start:end] == chunk.text

    by_doc: dict[str, list] = {}
    for chunk in chunk_set.chunks:
        by_doc.setdefault(chunk.doc_id, []).append(chunk)
    for doc_id, chunks in by_doc.items():
        if strategy == ChunkingStrategy.NAIVE:
            rebuilt = [token for c in chunks for token in tokenizer.tokenize(c.text)]
            assert rebuilt == tokenizer.tokenize(bodies[doc_id])
        if strategy == ChunkingStrategy.RECURSIVE:
            for previous, current in zip(chunks, chunks[1:]):
                tail = tokenizer.tokenize(previous.text)[-cfg.overlap_tokens:]
                assert tokenizer.tokenize(current.text)[:len(tail)] == tail


def test_semantic_chunks_are_more_coherent_than_naive_windows(fixture_corpus):
    embedder = MockEmbedder(dimension=256, seed=7)

    def mean_coherence(strategy: ChunkingStrategy) -> float:
        chunk_set = chunk_corpus(fixture_corpus, fixture_chunking(strategy), embedder=embedder)
        return float(np.mean([chunk_coherence(c.text, embedder) for c in chunk_set.chunks]))

    assert mean_coherence(ChunkingStrategy.SEMANTIC) >= mean_coherence(ChunkingStrategy.NAIVE)


def test_compare_chunk_counts():
    stats = {
        ChunkingStrategy.SEMANTIC: ChunkStats(ChunkingStrategy.SEMANTIC, chunk_count=139),
        ChunkingStrategy.RECURSIVE: ChunkStats(ChunkingStrategy.RECURSIVE, chunk_count=100),
    }
    assert compare_chunk_counts(stats) == {"semantic_vs_recursive": pytest.approx(0.39)}


def test_chunks_save_and_load(tmp_path, rng):
    corpus = Corpus("c", [random_document(rng, i) for i in range(3)])
    chunk_set = chunk_corpus(corpus, RECURSIVE)
    path = tmp_path / "recursive.jsonl"
    save_chunks(path, chunk_set)

    loaded = load_chunks(path, ChunkingStrategy.RECURSIVE)
    assert loaded.chunks == chunk_set.chunks
    with pytest.raises(ChunkingError, match="expected naive chunk"):
        load_chunks(path, ChunkingStrategy.NAIVE)
