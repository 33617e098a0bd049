"""Tests for pooled ground truth, retrieval metrics and the report."""
import math
from collections import Counter

import numpy as np
import pytest

from ragforge.chunking import ChunkingStrategy
from ragforge.errors import EvaluationError, ProviderError
from ragforge.evaluation import (
    BaseReranker,
    GroundTruthBuilder,
    JudgmentSet,
    MetricReport,
    MockReranker,
    RelevanceJudgment,
    build_ground_truth,
    build_pools,
    canonical_report,
    evaluate_all,
    hit_rate_at_k,
    load_judgments,
    metadata_consistency_at_k,
    min_max_normalize,
    mock_rerank,
    mrr_at_k,
    ndcg_at_k,
    precision_at_k,
    report_text,
    save_judgments,
)
from ragforge.retrieval import QueryRecord, RankedHit, RetrievalResult, all_configs, run_matrix
from conftest import build_matrix


CELLS = [config.cell for config in all_configs()]


def judged(query_id, chunk_id, score, relevant=None, highly=False, strategies=("naive",)):
    return RelevanceJudgment(
        query_id=query_id,
        chunk_id=chunk_id,
        raw_score=score,
        normalized_score=score,
        relevant=score >= 0.8 if relevant is None else relevant,
        highly_relevant=highly,
        strategies=list(strategies),
    )


def ranked(query_id, chunk_ids, config="naive+content"):
    hits = [RankedHit(cid, 1.0 - i / 100, i + 1) for i, cid in enumerate(chunk_ids)]
    return RetrievalResult(query_id, config, hits)


def ids(n, prefix="c"):
    return [f"{prefix}{i}" for i in range(n)]


# normalization and pooling

def test_min_max_normalize():
    assert min_max_normalize([2.0, 5.0, 8.0]) == [0.0, 0.5, 1.0]
    assert min_max_normalize([3.0, 3.0, 3.0]) == [1.0, 1.0, 1.0]
    assert min_max_normalize([4.2]) == [1.0]
    assert min_max_normalize([]) == []


def test_identical_candidates_are_pooled_once():
    query = QueryRecord("q1", "backup schedule")
    chunk_ids = ids(50)
    results = [ranked("q1", chunk_ids, cell) for cell in CELLS]
    texts = {strategy: {cid: f"text of {cid}" for cid in chunk_ids} for strategy in ChunkingStrategy}

    pool = build_pools([query], results, texts, pool_size=50)["q1"]

    assert len(pool) == 50
    assert pool[0].strategies == ["naive", "recursive", "semantic"]


def test_same_id_with_different_text_is_judged_per_text():
    query = QueryRecord("q1", "backup schedule")
    results = [ranked("q1", ["doc#0"], cell) for cell in CELLS]
    texts = {strategy: {"doc#0": f"{strategy.value} text"} for strategy in ChunkingStrategy}
    pool = build_pools([query], results, texts)["q1"]
    assert [entry.strategies for entry in pool] == [["naive"], ["recursive"], ["semantic"]]


def test_pool_size_caps_each_configuration():
    query = QueryRecord("q1", "backup schedule")
    results = [ranked("q1", ids(20), cell) for cell in CELLS]
    texts = {strategy: {cid: cid for cid in ids(20)} for strategy in ChunkingStrategy}
    assert len(build_pools([query], results, texts, pool_size=5)["q1"]) == 5


def test_pooling_needs_every_configuration():
    query = QueryRecord("q1", "backup schedule")
    results = [ranked("q1", ["c0"], cell) for cell in CELLS if cell != "semantic+content"]
    texts = {strategy: {"c0": "x"} for strategy in ChunkingStrategy}
    with pytest.raises(EvaluationError, match="semantic\\+content"):
        build_pools([query], results, texts)


# ground truth

class ConstantReranker(BaseReranker):
    def score(self, query, documents):
        return [3.0] * len(documents)


class CountingReranker(MockReranker):
    def __init__(self):
        super().__init__(seed=7, dimension=128)
        self.calls = 0

    def score(self, query, documents):
        self.calls += 1
        return super().score(query, documents)


class BrokenReranker(MockReranker):
    def score(self, query, documents):
        raise ProviderError("HTTP 503")


@pytest.fixture
def matrix_results(embedder):
    indexes, models, texts = build_matrix(embedder)
    queries = [
        QueryRecord("q1", "How do I enable bucket versioning?").with_intent(),
        QueryRecord("q2", "Fix the cache timeout error").with_intent(),
        QueryRecord("q3", "backup retention").with_intent(),
    ]
    results = run_matrix(queries, indexes, embedder, models, k=10)
    return queries, results, texts


def test_judgments_are_min_max_normalized_per_query(matrix_results):
    queries, results, texts = matrix_results
    judgments = build_ground_truth(queries, results, texts, MockReranker(dimension=128), pool_size=50)

    for query in queries:
        scores = [j.normalized_score for j in judgments.for_query(query.query_id)]
        assert min(scores) == 0.0
        assert max(scores) == 1.0
        for judgment in judgments.for_query(query.query_id):
            assert judgment.relevant == (judgment.normalized_score >= 0.8)
        assert any(j.highly_relevant for j in judgments.for_query(query.query_id))
    # six distinct texts per chunking strategy, one pool entry each
    assert len(judgments.for_query("q1")) == 18


def test_highly_relevant_is_above_the_percentile(matrix_results):
    queries, results, texts = matrix_results
    judgments = build_ground_truth(queries, results, texts, MockReranker(dimension=128), percentile=50.0)
    for query in queries:
        pool = judgments.for_query(query.query_id)
        threshold = np.percentile([j.normalized_score for j in pool], 50.0)
        assert [j.highly_relevant for j in pool] == [j.normalized_score > threshold or j.normalized_score == 1.0 for j in pool]


def test_global_percentile_scope(matrix_results):
    queries, results, texts = matrix_results
    judgments = build_ground_truth(
        queries, results, texts, MockReranker(dimension=128), percentile=50.0, percentile_scope="global",
    )
    threshold = np.percentile([j.normalized_score for j in judgments], 50.0)
    assert [j.highly_relevant for j in judgments] == [j.normalized_score > threshold or j.normalized_score == 1.0 for j in judgments]


def test_degenerate_pool_is_all_relevant(matrix_results):
    queries, results, texts = matrix_results
    judgments = build_ground_truth(queries[:1], results, texts, ConstantReranker())
    assert all(j.normalized_score == 1.0 for j in judgments)
    assert all(j.relevant and j.highly_relevant for j in judgments)


class TwoLevelReranker(BaseReranker):
    def score(self, query, documents):
        return [5.0 if i % 2 == 0 else 0.0 for i in range(len(documents))]


def test_tied_pool_maximum_stays_highly_relevant(matrix_results):
    queries, results, texts = matrix_results
    judgments = build_ground_truth(queries[:1], results, texts, TwoLevelReranker(), percentile=95.0)
    pool = list(judgments)
    # half the pool ties at the maximum, so the percentile threshold is 1.0
    assert np.percentile([j.normalized_score for j in pool], 95.0) == 1.0
    assert [j.highly_relevant for j in pool] == [j.normalized_score == 1.0 for j in pool]
    assert any(j.highly_relevant for j in pool)


def test_lookup_is_per_chunking_strategy(matrix_results):
    queries, results, texts = matrix_results
    judgments = build_ground_truth(queries, results, texts, MockReranker(dimension=128))
    assert judgments.lookup("q1", "naive", "naive/doc0.md#0") is not None
    assert judgments.lookup("q1", "semantic", "naive/doc0.md#0") is None


def test_scores_are_checkpointed_and_reused(matrix_results, tmp_path):
    queries, results, texts = matrix_results
    checkpoint = tmp_path / "judgments_checkpoint.jsonl"
    first = GroundTruthBuilder(CountingReranker(), batch_size=4).build(queries, results, texts, checkpoint)

    reranker = CountingReranker()
    second = GroundTruthBuilder(reranker, batch_size=4).build(queries, results, texts, checkpoint)
    assert reranker.calls == 0
    assert [j.to_dict() for j in second] == [j.to_dict() for j in first]


def test_reranker_failure_is_an_evaluation_error(matrix_results):
    queries, results, texts = matrix_results
    builder = GroundTruthBuilder(BrokenReranker(), max_retries=1, retry_wait=0)
    with pytest.raises(EvaluationError, match="after 2 attempts"):
        builder.build(queries, results, texts)


def test_judgments_round_trip(matrix_results, tmp_path):
    queries, results, texts = matrix_results
    judgments = build_ground_truth(queries, results, texts, MockReranker(dimension=128))
    save_judgments(tmp_path / "judgments.jsonl", judgments)
    loaded = load_judgments(tmp_path / "judgments.jsonl")
    assert [j.to_dict() for j in loaded] == [j.to_dict() for j in judgments]


def test_mock_rerank():
    text = "enable bucket versioning"
    assert mock_rerank(text, text) == pytest.approx(10.0)
    assert mock_rerank(text, "kernel thread scheduler") < mock_rerank(text, "bucket versioning policy")
    assert abs(mock_rerank(text, "kernel thread scheduler priority")) < 2.0
    assert mock_rerank(text, "x y") == mock_rerank(text, "x y")


# metrics

def test_hit_rate():
    judgments = JudgmentSet([judged("q1", "c2", 1.0, highly=True), judged("q2", "c0", 0.5)])
    results = [ranked("q1", ids(5)), ranked("q2", ids(5))]
    assert hit_rate_at_k(judgments, results, 5) == 0.5
    assert hit_rate_at_k(judgments, results, 1) == 0.0


def test_precision_counts_relevant_over_k():
    judgments = JudgmentSet([judged("q1", cid, 0.9) for cid in ids(7)])
    assert precision_at_k(judgments, [ranked("q1", ids(10))], 10) == pytest.approx(0.7)
    # missing slots count as misses
    assert precision_at_k(judgments, [ranked("q1", ids(5))], 10) == pytest.approx(0.5)
    assert precision_at_k(JudgmentSet([]), [ranked("q1", ids(10))], 10) == 0.0


def test_mrr():
    judgments = JudgmentSet([judged("q1", "c3", 0.9), judged("q2", "c0", 1.0), judged("q3", "c1", 0.85)])
    assert mrr_at_k(judgments, [ranked("q1", ids(10))], 10) == 0.25
    assert mrr_at_k(judgments, [ranked("q2", ids(10)), ranked("q3", ids(10))], 10) == 0.75

    late = JudgmentSet([judged("q1", "c10", 1.0)])
    assert mrr_at_k(late, [ranked("q1", ids(12))], 10) == 0.0


def test_ndcg_worked_example():
    judgments = JudgmentSet([judged("q1", "a", 0.5), judged("q1", "b", 1.0)])
    value = ndcg_at_k(judgments, [ranked("q1", ["a", "b"])], 2)
    dcg = 0.5 + 1.0 / math.log2(3)
    idcg = 1.0 + 0.5 / math.log2(3)
    assert dcg == pytest.approx(1.13093, abs=1e-5)
    assert idcg == pytest.approx(1.31546, abs=1e-5)
    assert value == pytest.approx(0.85972, abs=1e-5)


def test_ndcg_edges():
    judgments = JudgmentSet([judged("q1", "a", 1.0), judged("q1", "b", 0.5), judged("q2", "a", 0.0)])
    assert ndcg_at_k(judgments, [ranked("q1", ["a", "b"])], 2) == pytest.approx(1.0)
    assert ndcg_at_k(judgments, [ranked("q2", ["a", "b"])], 2) == 0.0


def test_binary_ndcg_uses_relevance():
    judgments = JudgmentSet([judged("q1", "a", 0.5), judged("q1", "b", 0.9)])
    assert ndcg_at_k(judgments, [ranked("q1", ["b", "a"])], 2, binary=True) == pytest.approx(1.0)
    assert ndcg_at_k(judgments, [ranked("q1", ["a", "b"])], 2, binary=True) == pytest.approx(1 / math.log2(3))


@pytest.mark.parametrize(
    ("labels", "expected"),
    [(list("AAABB"), 0.6), (list("AAAAA"), 1.0), (list("ABCDE"), 0.2), (["A"], 1.0)],
)
def test_metadata_consistency(labels, expected):
    chunk_ids = ids(len(labels))
    categories = {"naive": dict(zip(chunk_ids, labels))}
    assert metadata_consistency_at_k(categories, [ranked("q1", chunk_ids)], 5) == pytest.approx(expected)


def test_consistency_needs_category_for_every_hit():
    with pytest.raises(EvaluationError, match="no metadata"):
        metadata_consistency_at_k({"naive": {}}, [ranked("q1", ["c0"])], 5)


def test_metrics_reject_empty_query_sets_and_bad_k():
    with pytest.raises(EvaluationError):
        hit_rate_at_k(JudgmentSet([]), [], 5)
    with pytest.raises(ValueError):
        precision_at_k(JudgmentSet([]), [ranked("q1", ["c0"])], 0)


def _oracle(judgments, categories, results, k):
    """Straightforward re-implementation of every metric from the definitions."""
    table = {(j.query_id, j.chunk_id): j for j in judgments}
    hit = precision = mrr = ndcg = consistency = 0.0
    for result in results:
        top = [h.chunk_id for h in result.hits][:k]
        labels = [table.get((result.query_id, cid)) for cid in top]
        hit += 1.0 if any(j and j.highly_relevant for j in labels) else 0.0
        precision += len([j for j in labels if j and j.relevant]) / k
        for rank, j in enumerate(labels):
            if j and j.relevant:
                mrr += 1.0 / (rank + 1)
                break
        dcg = 0.0
        for rank, j in enumerate(labels):
            dcg += (j.normalized_score if j else 0.0) / math.log2(rank + 2)
        pool = sorted((j.normalized_score for j in judgments if j.query_id == result.query_id), reverse=True)
        idcg = 0.0
        for rank, score in enumerate(pool[:k]):
            idcg += score / math.log2(rank + 2)
        ndcg += dcg / idcg if idcg > 0 else 0.0
        if top:
            consistency += max(Counter(categories[cid] for cid in top).values()) / len(top)
    n = len(results)
    return hit / n, precision / n, mrr / n, ndcg / n, consistency / n


def test_metrics_match_brute_force_oracle(rng):
    for _ in range(100):
        n_chunks = int(rng.integers(1, 21))
        n_queries = int(rng.integers(1, 9))
        chunk_ids = ids(n_chunks)
        categories = {cid: f"cat{rng.integers(0, 3)}" for cid in chunk_ids}
        judgments, results = [], []
        for q in range(n_queries):
            qid = f"q{q}"
            judged_ids = rng.choice(chunk_ids, size=int(rng.integers(1, n_chunks + 1)), replace=False)
            for cid in judged_ids:
                score = float(rng.choice([0.0, 1.0, rng.random()]))
                judgments.append(judged(qid, str(cid), score, highly=bool(rng.random() < 0.2)))
            retrieved = rng.permutation(chunk_ids)[: int(rng.integers(0, n_chunks + 1))]
            results.append(ranked(qid, [str(cid) for cid in retrieved]))
        judgment_set = JudgmentSet(judgments)
        lookup = {"naive": categories}

        for k in (1, 3, 5, 10):
            expected = _oracle(judgments, categories, results, k)
            actual = (
                hit_rate_at_k(judgment_set, results, k),
                precision_at_k(judgment_set, results, k),
                mrr_at_k(judgment_set, results, k),
                ndcg_at_k(judgment_set, results, k),
                metadata_consistency_at_k(lookup, results, k),
            )
            for a, e in zip(actual, expected):
                assert a == pytest.approx(e, abs=1e-12)
                assert 0.0 <= a <= 1.0
            if k > 1:
                assert hit_rate_at_k(judgment_set, results, k) >= hit_rate_at_k(judgment_set, results, 1)


# report

def _full_results(query_ids, chunk_ids):
    return [ranked(qid, chunk_ids, cell) for cell in CELLS for qid in query_ids]


def _categories(chunk_ids):
    return {strategy.value: {cid: "general" for cid in chunk_ids} for strategy in ChunkingStrategy}


def test_evaluate_all_needs_every_cell():
    results = [r for r in _full_results(["q1"], ["c0"]) if r.config != "recursive+prefix_fusion"]
    with pytest.raises(EvaluationError, match="No retrieval results for: recursive\\+prefix_fusion"):
        evaluate_all(results, JudgmentSet([]), _categories(["c0"]))


def test_degenerate_single_query_report_is_complete():
    strategies = [s.value for s in ChunkingStrategy]
    judgments = JudgmentSet([judged("q1", "c0", 1.0, relevant=True, highly=True, strategies=strategies)])
    report = evaluate_all(_full_results(["q1"], ["c0"]), judgments, _categories(["c0"]), k_values=[10, 1, 5, 5])

    assert report.k_values == [1, 5, 10]
    for metric in report.metrics:
        for k in report.k_values:
            values = report.metrics[metric][str(k)]
            assert sorted(values) == sorted(CELLS)
            assert not any(math.isnan(v) for v in values.values())
    assert report.value("hit_rate", 1, "semantic+content") == 1.0
    assert report.value("precision", 10, "naive+tfidf_weighted") == pytest.approx(0.1)
    assert len(report.per_query["naive+content"]) == 1


def test_report_matches_metric_functions():
    chunk_ids = ids(6)
    judgments = JudgmentSet([
        judged("q1", "c1", 0.9, highly=True, strategies=["naive", "recursive", "semantic"]),
        judged("q1", "c4", 0.3, strategies=["naive", "recursive", "semantic"]),
        judged("q2", "c0", 1.0, strategies=["naive", "recursive", "semantic"]),
    ])
    results = _full_results(["q1", "q2"], chunk_ids)
    report = evaluate_all(results, judgments, _categories(chunk_ids), k_values=[5])
    naive = [r for r in results if r.config == "naive+content"]
    assert report.value("mrr", 5, "naive+content") == mrr_at_k(judgments, naive, 5)
    assert report.value("ndcg", 5, "naive+content") == pytest.approx(ndcg_at_k(judgments, naive, 5))


def test_report_round_trip_and_canonical_form():
    judgments = JudgmentSet([])
    report = evaluate_all(_full_results(["q1"], ["c0"]), judgments, _categories(["c0"]))
    data = report.to_dict()
    assert MetricReport.from_dict(data).metrics == report.metrics

    canonical = canonical_report(data)
    assert "generated_at" not in canonical and "latency" not in canonical
    assert canonical["metrics"] == data["metrics"]

    del data["metrics"]["mrr"]["5"]["semantic+content"]
    with pytest.raises(EvaluationError, match="mrr@5"):
        MetricReport.from_dict(data)


def test_rendered_tables_use_retriever_rows_and_chunking_columns():
    report = evaluate_all(_full_results(["q1"], ["c0"]), JudgmentSet([]), _categories(["c0"]), k_values=[10])
    text = report_text(report, width=120)
    assert "Hit Rate (@10)" in text
    header = next(line for line in text.splitlines() if "Retriever" in line)
    assert header.index("Semantic") < header.index("Naive") < header.index("Recursive")
    rows = [line for line in text.splitlines() if line.strip("│ ").startswith(("Content", "Prefix-Fusion", "TF-IDF"))]
    assert [row.strip("│ ").split()[0] for row in rows[:3]] == ["Content", "Prefix-Fusion", "TF-IDF"]
