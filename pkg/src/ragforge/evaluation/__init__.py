"""Ground-truth generation and retrieval metrics."""
from .rerank import BaseReranker, HttpReranker, MockReranker, get_reranker, mock_rerank
from .ground_truth import (
    GroundTruthBuilder,
    JudgmentSet,
    RelevanceJudgment,
    build_ground_truth,
    build_pools,
    load_judgments,
    min_max_normalize,
    save_judgments,
)
from .metrics import (
    METRICS,
    hit_rate_at_k,
    metadata_consistency_at_k,
    mrr_at_k,
    ndcg_at_k,
    precision_at_k,
    query_metrics,
)
from .report import (
    MetricReport,
    canonical_report,
    evaluate_all,
    latency_summary,
    metric_table,
    render_report,
    report_text,
)

__all__ = [
    "BaseReranker", "HttpReranker", "MockReranker", "get_reranker", "mock_rerank",
    "GroundTruthBuilder", "JudgmentSet", "RelevanceJudgment", "build_ground_truth",
    "build_pools", "load_judgments", "min_max_normalize", "save_judgments",
    "METRICS", "hit_rate_at_k", "metadata_consistency_at_k", "mrr_at_k", "ndcg_at_k",
    "precision_at_k", "query_metrics",
    "MetricReport", "canonical_report", "evaluate_all", "latency_summary",
    "metric_table", "render_report", "report_text",
]
