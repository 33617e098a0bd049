"""Metric report assembly and rendering."""
import io
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.table import Table

from ragforge.chunking.models import ChunkingStrategy
from ragforge.embedding.fusion import EmbeddingStrategy
from ragforge.errors import EvaluationError
from ragforge.retrieval.models import RetrievalResult, all_configs, cell_name
from .ground_truth import JudgmentSet
from .metrics import METRIC_TITLES, METRICS, CategoryLookup, query_metrics


logger = logging.getLogger(__name__)

REPORT_FORMAT = "ragforge-report"
REPORT_VERSION = 1

# Table layout: retriever rows x chunking columns.
ROW_ORDER = (EmbeddingStrategy.CONTENT, EmbeddingStrategy.PREFIX_FUSION, EmbeddingStrategy.TFIDF_WEIGHTED)
COLUMN_ORDER = (ChunkingStrategy.SEMANTIC, ChunkingStrategy.NAIVE, ChunkingStrategy.RECURSIVE)

# Fields that vary between identical runs.
VOLATILE_KEYS = ("generated_at", "latency")


def latency_summary(values: Sequence[int]) -> dict[str, float]:
    """Mean, p50, p95 and max of microsecond timings."""
    if not values:
        return {"count": 0, "mean": 0.0, "p50": 0.0, "p95": 0.0, "max": 0.0}
    array = np.asarray(values, dtype=np.float64)
    return {
        "count": len(values),
        "mean": float(array.mean()),
        "p50": float(np.percentile(array, 50)),
        "p95": float(np.percentile(array, 95)),
        "max": float(array.max()),
    }


@dataclass
class MetricReport:
    k_values: list[int]
    # metric -> str(k) -> cell -> value
    metrics: dict[str, dict[str, dict[str, float]]]
    # cell -> [{query_id, metrics: {str(k): {metric: value}}}]
    per_query: dict[str, list[dict[str, Any]]]
    latency: dict[str, dict[str, dict[str, float]]]
    settings: dict[str, Any] = field(default_factory=dict)
    stats: dict[str, Any] = field(default_factory=dict)
    generated_at: str = ""

    def value(self, metric: str, k: int, cell: str) -> float:
        return self.metrics[metric][str(k)][cell]

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": REPORT_FORMAT,
            "version": REPORT_VERSION,
            "generated_at": self.generated_at,
            "k_values": self.k_values,
            "settings": self.settings,
            "metrics": self.metrics,
            "per_query": self.per_query,
            "latency": self.latency,
            "stats": self.stats,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MetricReport":
        if data.get("format") != REPORT_FORMAT:
            raise EvaluationError(f"Not a ragforge report (format {data.get('format')!r})")
        report = cls(
            k_values=[int(k) for k in data["k_values"]],
            metrics=data["metrics"],
            per_query=data.get("per_query", {}),
            latency=data.get("latency", {}),
            settings=data.get("settings", {}),
            stats=data.get("stats", {}),
            generated_at=data.get("generated_at", ""),
        )
        report.check_complete()
        return report

    def check_complete(self) -> None:
        """Every metric and k must carry all nine cells."""
        expected = [config.cell for config in all_configs()]
        for metric in METRICS:
            for k in self.k_values:
                cells = self.metrics.get(metric, {}).get(str(k), {})
                missing = [cell for cell in expected if cell not in cells]
                if missing:
                    raise EvaluationError(
                        f"Report is missing {metric}@{k} for: {', '.join(missing)}"
                    )


def canonical_report(data: dict[str, Any]) -> dict[str, Any]:
    """Report dict without timestamps and timings, for run-to-run comparison."""
    return {key: value for key, value in data.items() if key not in VOLATILE_KEYS}


def evaluate_all(
    results: Sequence[RetrievalResult],
    judgments: JudgmentSet,
    categories: CategoryLookup,
    k_values: Sequence[int] = (1, 5, 10),
    binary_gain: bool = False,
    settings: Optional[dict[str, Any]] = None,
    stats: Optional[dict[str, Any]] = None,
) -> MetricReport:
    """Score all nine configurations at every k."""
    by_cell: dict[str, list[RetrievalResult]] = defaultdict(list)
    for result in results:
        by_cell[result.config].append(result)

    cells = [config.cell for config in all_configs()]
    missing = [cell for cell in cells if not by_cell.get(cell)]
    if missing:
        raise EvaluationError(f"No retrieval results for: {', '.join(missing)}")
    query_sets = {cell: [r.query_id for r in by_cell[cell]] for cell in cells}
    reference = query_sets[cells[0]]
    for cell, ids in query_sets.items():
        if ids != reference:
            raise EvaluationError(f"{cell} was run on a different query set than {cells[0]}")

    k_values = sorted(set(k_values))
    metrics: dict[str, dict[str, dict[str, float]]] = {
        metric: {str(k): {} for k in k_values} for metric in METRICS
    }
    per_query: dict[str, list[dict[str, Any]]] = {}
    latency: dict[str, dict[str, dict[str, float]]] = {}

    for cell in cells:
        cell_results = by_cell[cell]
        rows = []
        sums = {str(k): dict.fromkeys(METRICS, 0.0) for k in k_values}
        for result in cell_results:
            row = {}
            for k in k_values:
                values = query_metrics(judgments, categories, result, k, binary_gain)
                row[str(k)] = values
                for metric, value in values.items():
                    sums[str(k)][metric] += value
            rows.append({"query_id": result.query_id, "metrics": row})
        for k in k_values:
            for metric in METRICS:
                metrics[metric][str(k)][cell] = sums[str(k)][metric] / len(cell_results)
        per_query[cell] = rows
        latency[cell] = {
            "search_micros": latency_summary([r.latency_micros for r in cell_results]),
            "embed_micros": latency_summary([r.embed_latency_micros for r in cell_results]),
        }

    logger.info(f"Evaluated {len(cells)} configurations on {len(reference)} queries")
    return MetricReport(
        k_values=list(k_values),
        metrics=metrics,
        per_query=per_query,
        latency=latency,
        settings=settings or {},
        stats=stats or {},
        generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def metric_table(report: MetricReport, metric: str, k: int) -> Table:
    table = Table(title=f"{METRIC_TITLES[metric]} (@{k})")
    table.add_column("Retriever", style="cyan")
    for chunking in COLUMN_ORDER:
        table.add_column(chunking.value.capitalize(), justify="right", style="green")
    for embedding in ROW_ORDER:
        table.add_row(
            embedding.label,
            *(f"{report.value(metric, k, cell_name(chunking, embedding)):.3f}" for chunking in COLUMN_ORDER),
        )
    return table


def _cell_stat_table(title: str, values: dict[str, Any], key: str, fmt: str = "{:.3f}") -> Table:
    table = Table(title=title)
    table.add_column("Retriever", style="cyan")
    for chunking in COLUMN_ORDER:
        table.add_column(chunking.value.capitalize(), justify="right", style="green")
    for embedding in ROW_ORDER:
        cells = []
        for chunking in COLUMN_ORDER:
            entry = values.get(cell_name(chunking, embedding))
            cells.append(fmt.format(entry[key]) if entry else "-")
        table.add_row(embedding.label, *cells)
    return table


def render_report(report: MetricReport, console: Console, k: Optional[int] = None) -> None:
    """Print the metric tables and any attached statistics."""
    k_values = [k] if k is not None else report.k_values
    for k_value in k_values:
        for metric in METRICS:
            console.print(metric_table(report, metric, k_value))
            console.print()

    chunk_stats = report.stats.get("chunks")
    if chunk_stats:
        table = Table(title="Chunk Statistics")
        table.add_column("Strategy", style="cyan")
        for column in ("Chunks", "Mean tokens", "Max tokens", "Chunks/doc", "Coherence"):
            table.add_column(column, justify="right", style="green")
        for chunking in COLUMN_ORDER:
            entry = chunk_stats.get("strategies", {}).get(chunking.value)
            if not entry:
                continue
            coherence = entry.get("mean_coherence")
            table.add_row(
                chunking.value.capitalize(),
                str(entry["chunk_count"]),
                f"{entry['mean_tokens']:.1f}",
                str(entry["max_tokens"]),
                f"{entry['chunks_per_document']:.2f}",
                f"{coherence:.3f}" if coherence is not None else "-",
            )
        console.print(table)
        for name, value in chunk_stats.get("relative_counts", {}).items():
            console.print(f"  {name.replace('_', ' ')}: {value:+.1%}")
        console.print()

    nn = report.stats.get("nearest_neighbor")
    if nn:
        console.print(_cell_stat_table("Average Nearest-Neighbour Distance", nn, "avg_nn_distance"))
        console.print()

    if report.latency:
        console.print(_cell_stat_table(
            "Median Search Latency (µs)",
            {cell: values["search_micros"] for cell, values in report.latency.items()},
            "p50",
            "{:.0f}",
        ))


def report_text(report: MetricReport, width: int = 100) -> str:
    """Plain-text rendering of ``render_report``."""
    console = Console(record=True, width=width, file=io.StringIO(), color_system=None)
    render_report(report, console)
    return console.export_text()
