"""
Retrieval metrics over pooled judgments.

Each metric is the mean over queries of a per-query score computed on the
top-k hits of one configuration's results. Unjudged hits count as
non-relevant with zero gain.
"""
import math
from collections import Counter
from typing import Mapping, Optional, Sequence

from ragforge.errors import EvaluationError
from ragforge.retrieval.models import RetrievalResult, parse_cell
from .ground_truth import JudgmentSet, RelevanceJudgment


METRICS = ("hit_rate", "precision", "mrr", "ndcg", "metadata_consistency")
METRIC_TITLES = {
    "hit_rate": "Hit Rate",
    "precision": "Precision",
    "mrr": "MRR",
    "ndcg": "NDCG",
    "metadata_consistency": "Metadata Consistency",
}

# chunking strategy value -> chunk_id -> primary_category
CategoryLookup = Mapping[str, Mapping[str, str]]


def _strategy(result: RetrievalResult) -> str:
    return parse_cell(result.config)[0].value


def _judged_top(
    judgments: JudgmentSet, result: RetrievalResult, k: int
) -> list[Optional[RelevanceJudgment]]:
    strategy = _strategy(result)
    return [judgments.lookup(result.query_id, strategy, hit.chunk_id) for hit in result.hits[:k]]


def _check(results: Sequence[RetrievalResult], k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not results:
        raise EvaluationError("Cannot compute metrics over an empty query set")


def query_hit(judgments: JudgmentSet, result: RetrievalResult, k: int) -> float:
    return 1.0 if any(j is not None and j.highly_relevant for j in _judged_top(judgments, result, k)) else 0.0


def query_precision(judgments: JudgmentSet, result: RetrievalResult, k: int) -> float:
    return sum(1 for j in _judged_top(judgments, result, k) if j is not None and j.relevant) / k


def query_reciprocal_rank(judgments: JudgmentSet, result: RetrievalResult, k: int) -> float:
    for rank, judgment in enumerate(_judged_top(judgments, result, k), start=1):
        if judgment is not None and judgment.relevant:
            return 1.0 / rank
    return 0.0


def gain(judgment: Optional[RelevanceJudgment], binary: bool = False) -> float:
    if judgment is None:
        return 0.0
    if binary:
        return 1.0 if judgment.relevant else 0.0
    return judgment.normalized_score


def dcg(gains: Sequence[float]) -> float:
    return sum(g / math.log2(i + 1) for i, g in enumerate(gains, start=1))


def query_ndcg(judgments: JudgmentSet, result: RetrievalResult, k: int, binary: bool = False) -> float:
    gains = [gain(j, binary) for j in _judged_top(judgments, result, k)]
    ideal = sorted((gain(j, binary) for j in judgments.for_query(result.query_id)), reverse=True)[:k]
    idcg = dcg(ideal)
    if idcg == 0:
        return 0.0
    return min(1.0, dcg(gains) / idcg)


def query_consistency(categories: CategoryLookup, result: RetrievalResult, k: int) -> float:
    """Share of the modal primary_category among the top-k hits; 0.0 with no hits."""
    hits = result.hits[:k]
    if not hits:
        return 0.0
    strategy = _strategy(result)
    try:
        labels = [categories[strategy][hit.chunk_id] for hit in hits]
    except KeyError as e:
        raise EvaluationError(f"{result.config}: no metadata for retrieved chunk {e}") from None
    return Counter(labels).most_common(1)[0][1] / len(hits)


def hit_rate_at_k(judgments: JudgmentSet, results: Sequence[RetrievalResult], k: int) -> float:
    """Fraction of queries with a highly relevant chunk in the top k."""
    _check(results, k)
    return sum(query_hit(judgments, r, k) for r in results) / len(results)


def precision_at_k(judgments: JudgmentSet, results: Sequence[RetrievalResult], k: int) -> float:
    """Mean share of relevant chunks in the top k; empty slots count as misses."""
    _check(results, k)
    return sum(query_precision(judgments, r, k) for r in results) / len(results)


def mrr_at_k(judgments: JudgmentSet, results: Sequence[RetrievalResult], k: int) -> float:
    _check(results, k)
    return sum(query_reciprocal_rank(judgments, r, k) for r in results) / len(results)


def ndcg_at_k(
    judgments: JudgmentSet,
    results: Sequence[RetrievalResult],
    k: int,
    binary: bool = False,
) -> float:
    """Graded NDCG; the ideal ranking is the query's whole judged pool."""
    _check(results, k)
    return sum(query_ndcg(judgments, r, k, binary) for r in results) / len(results)


def metadata_consistency_at_k(
    categories: CategoryLookup, results: Sequence[RetrievalResult], k: int
) -> float:
    _check(results, k)
    return sum(query_consistency(categories, r, k) for r in results) / len(results)


def query_metrics(
    judgments: JudgmentSet,
    categories: CategoryLookup,
    result: RetrievalResult,
    k: int,
    binary_gain: bool = False,
) -> dict[str, float]:
    return {
        "hit_rate": query_hit(judgments, result, k),
        "precision": query_precision(judgments, result, k),
        "mrr": query_reciprocal_rank(judgments, result, k),
        "ndcg": query_ndcg(judgments, result, k, binary_gain),
        "metadata_consistency": query_consistency(categories, result, k),
    }
