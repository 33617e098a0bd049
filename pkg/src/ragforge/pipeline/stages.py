"""
Staged pipeline runner.

Each stage reads its predecessor's artifacts from the workspace and writes
its own. A stage is skipped ("up to date") when a stamp of its input file
hashes and its config section matches the previous run and all of its
outputs still exist.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from ragforge.chunking.corpus import chunk_corpus, compare_chunk_counts, load_chunks, save_chunks
from ragforge.chunking.models import ChunkingStrategy, ChunkStats
from ragforge.chunking.tokenizer import get_tokenizer
from ragforge.config import PipelineConfig
from ragforge.corpus.store import corpus_token_counts, ingest_sources, load_corpus, save_corpus
from ragforge.embedding.encoder import embed_enriched
from ragforge.embedding.fusion import FusionWeights, render_prefix
from ragforge.embedding.providers import BaseEmbedder, get_embedder
from ragforge.embedding.tfidf import fit_tfidf, load_tfidf, save_tfidf
from ragforge.errors import ConfigError, IndexFormatError
from ragforge.evaluation.ground_truth import GroundTruthBuilder, load_judgments, save_judgments
from ragforge.evaluation.report import evaluate_all, report_text
from ragforge.evaluation.rerank import get_reranker
from ragforge.index.persistence import load_index, save_index
from ragforge.index.vector_index import VectorIndex, nn_stats
from ragforge.jsonl import read_json, write_json
from ragforge.metadata.enricher import MetadataEnricher, load_enriched, save_enriched
from ragforge.metadata.models import EnrichedChunk
from ragforge.metadata.providers import get_chat_provider
from ragforge.metadata.stats import metadata_stats
from ragforge.retrieval.models import all_configs, load_queries, load_results, save_queries, save_results
from ragforge.retrieval.retriever import run_matrix
from .stamps import is_current, stage_digest, write_stamp
from .workspace import Workspace


logger = logging.getLogger(__name__)

CHUNKINGS = tuple(ChunkingStrategy)
CELLS = [config.cell for config in all_configs()]


class Stage(str, Enum):
    INGEST = "ingest"
    CHUNK = "chunk"
    ENRICH = "enrich"
    EMBED = "embed"
    INDEX = "index"
    RETRIEVE = "retrieve"
    GROUNDTRUTH = "groundtruth"
    EVALUATE = "evaluate"


@dataclass
class StageResult:
    stage: Stage
    skipped: bool
    message: str


class Pipeline:
    """Runs stages against one workspace."""

    def __init__(self, config: PipelineConfig, force: bool = False):
        self.config = config
        self.force = force
        self.workspace = Workspace(config.get_workspace_dir())
        self.tokenizer = get_tokenizer(config.tokenizer.name)
        self._embedder: Optional[BaseEmbedder] = None

    @property
    def embedder(self) -> BaseEmbedder:
        if self._embedder is None:
            self._embedder = get_embedder(self.config)
        return self._embedder

    @property
    def weights(self) -> FusionWeights:
        return FusionWeights(self.config.embedding.content_weight, self.config.embedding.metadata_weight)

    @property
    def retrieval_depth(self) -> int:
        return max(self.config.evaluation.pool_size, max(self.config.retrieval.k_values))

    def run_all(self, on_stage: Optional[Callable[[StageResult], None]] = None) -> list[StageResult]:
        results = []
        for stage in Stage:
            result = self.run(stage)
            results.append(result)
            if on_stage:
                on_stage(result)
        return results

    def run(self, stage: Stage) -> StageResult:
        """Run one stage unless its stamp shows it is up to date."""
        self.config.check_credentials()
        ws = self.workspace
        inputs = self._inputs(stage)
        outputs = self._outputs(stage)
        digest = stage_digest(stage.value, inputs, self._settings(stage), root=ws.root)
        if not self.force and is_current(ws.stamp(stage.value), digest, outputs):
            logger.info(f"{stage.value}: up to date")
            return StageResult(stage, True, "up to date")

        message = getattr(self, f"_run_{stage.value}")()
        write_stamp(ws.stamp(stage.value), stage.value, digest)
        logger.info(f"{stage.value}: {message}")
        return StageResult(stage, False, message)

    # inputs, outputs and settings per stage

    def _inputs(self, stage: Stage) -> list[Path]:
        ws = self.workspace
        if stage == Stage.INGEST:
            return self._source_files()
        if stage == Stage.CHUNK:
            ws.require(Stage.INGEST.value, ws.corpus)
            return [ws.corpus]
        if stage == Stage.ENRICH:
            paths = [ws.chunks(s) for s in CHUNKINGS]
            ws.require(Stage.CHUNK.value, *paths)
            return paths
        if stage == Stage.EMBED:
            paths = [ws.enriched(s) for s in CHUNKINGS]
            ws.require(Stage.ENRICH.value, *paths)
            return paths
        if stage == Stage.INDEX:
            paths = [ws.embeddings(cell) for cell in CELLS]
            ws.require(Stage.EMBED.value, *paths)
            return paths
        if stage == Stage.RETRIEVE:
            ws.require(Stage.INGEST.value, ws.queries)
            ws.require(Stage.EMBED.value, *(ws.tfidf(s) for s in CHUNKINGS))
            paths = [ws.index(cell) for cell in CELLS]
            ws.require(Stage.INDEX.value, *paths)
            return [ws.queries, *(ws.tfidf(s) for s in CHUNKINGS), *paths]
        if stage == Stage.GROUNDTRUTH:
            ws.require(Stage.RETRIEVE.value, ws.results)
            return [ws.queries, ws.results, *(ws.enriched(s) for s in CHUNKINGS)]
        ws.require(Stage.GROUNDTRUTH.value, ws.judgments)
        ws.require(Stage.RETRIEVE.value, ws.results)
        stats = [p for p in (ws.chunk_stats, ws.metadata_stats, ws.index_stats, ws.corpus_stats) if p.exists()]
        return [ws.results, ws.judgments, *(ws.enriched(s) for s in CHUNKINGS), *stats]

    def _outputs(self, stage: Stage) -> list[Path]:
        ws = self.workspace
        return {
            Stage.INGEST: [ws.corpus, ws.corpus_stats],
            Stage.CHUNK: [*(ws.chunks(s) for s in CHUNKINGS), ws.chunk_stats],
            Stage.ENRICH: [*(ws.enriched(s) for s in CHUNKINGS), ws.metadata_stats],
            Stage.EMBED: [*(ws.tfidf(s) for s in CHUNKINGS), *(ws.embeddings(c) for c in CELLS)],
            Stage.INDEX: [*(ws.index(c) for c in CELLS), ws.index_stats],
            Stage.RETRIEVE: [ws.results],
            Stage.GROUNDTRUTH: [ws.judgments],
            Stage.EVALUATE: [ws.report_json, ws.report_text],
        }[stage]

    def _settings(self, stage: Stage) -> dict[str, Any]:
        cfg = self.config.masked_dump()
        embedding = {key: cfg["embedding"][key] for key in ("provider", "model", "dimension")}
        common = {"tokenizer": cfg["tokenizer"], "seeds": cfg["seeds"]}
        return {
            Stage.INGEST: {"corpus": cfg["corpus"], **common},
            Stage.CHUNK: {"chunking": cfg["chunking"], "embedding": embedding, **common},
            Stage.ENRICH: {"metadata": cfg["metadata"], **common},
            Stage.EMBED: {"embedding": cfg["embedding"], **common},
            Stage.INDEX: {},
            Stage.RETRIEVE: {
                "embedding": cfg["embedding"],
                "depth": self.retrieval_depth,
                **common,
            },
            Stage.GROUNDTRUTH: {"evaluation": cfg["evaluation"], "embedding": embedding, **common},
            Stage.EVALUATE: {"retrieval": cfg["retrieval"], "evaluation": cfg["evaluation"]},
        }[stage]

    def _source_files(self) -> list[Path]:
        corpus = self.config.corpus
        if not corpus.sources:
            raise ConfigError("No corpus sources configured (corpus.sources is empty)")
        files = []
        for source in corpus.sources:
            root = self.config.resolve_path(source.path)
            if root.is_dir():
                files.extend(p for p in root.rglob("*") if p.is_file())
        if corpus.queries_path:
            queries = self.config.resolve_path(corpus.queries_path)
            if queries.exists():
                files.append(queries)
        return files

    # stage bodies

    def _run_ingest(self) -> str:
        ws = self.workspace
        corpus_cfg = self.config.corpus
        sources = [(self.config.resolve_path(s.path), s.source_tag) for s in corpus_cfg.sources]
        corpus = ingest_sources(sources, corpus_cfg.corpus_id)
        save_corpus(ws.corpus, corpus)
        tokens = corpus_token_counts(corpus, self.tokenizer)
        documents: dict[str, int] = {}
        for doc in corpus:
            documents[doc.source_tag] = documents.get(doc.source_tag, 0) + 1
        write_json(ws.corpus_stats, {"documents": dict(sorted(documents.items())), "tokens": tokens})

        if corpus_cfg.queries_path:
            queries = load_queries(self.config.resolve_path(corpus_cfg.queries_path))
            save_queries(ws.queries, queries)
            return f"{len(corpus)} documents, {len(queries)} queries"
        logger.warning("No queries_path configured; retrieval stages will need queries.jsonl")
        return f"{len(corpus)} documents"

    def _run_chunk(self) -> str:
        ws = self.workspace
        corpus = load_corpus(ws.corpus)
        stats: dict[ChunkingStrategy, ChunkStats] = {}
        for strategy in CHUNKINGS:
            chunk_set = chunk_corpus(
                corpus,
                self.config.chunking_config(strategy),
                embedder=self.embedder if strategy == ChunkingStrategy.SEMANTIC else None,
                tokenizer=self.tokenizer,
                parallelism=self.config.general.parallelism,
            )
            save_chunks(ws.chunks(strategy), chunk_set)
            stats[strategy] = chunk_set.stats
        write_json(ws.chunk_stats, {
            "strategies": {s.value: stat.to_dict() for s, stat in stats.items()},
            "relative_counts": compare_chunk_counts(stats),
        })
        return ", ".join(f"{s.value} {stat.chunk_count}" for s, stat in stats.items()) + " chunks"

    def _run_enrich(self) -> str:
        ws = self.workspace
        section = self.config.metadata
        enricher = MetadataEnricher(
            get_chat_provider(self.config),
            batch_size=section.batch_size,
            max_retries=section.max_retries,
            parallelism=self.config.general.parallelism,
            retry_wait=section.retry_wait_seconds,
            temperature=section.temperature,
            max_output_tokens=section.max_output_tokens,
            prompt_token_budget=section.prompt_token_budget,
            tokenizer=self.tokenizer,
        )
        composition = {}
        fallbacks = 0
        for strategy in CHUNKINGS:
            chunks = load_chunks(ws.chunks(strategy), strategy)
            checkpoint = ws.enrich_checkpoint(strategy)
            records, report = enricher.enrich(chunks, checkpoint_path=checkpoint)
            save_enriched(ws.enriched(strategy), records)
            write_json(ws.enrich_failures(strategy), report.to_dict())
            checkpoint.unlink(missing_ok=True)
            composition[strategy.value] = metadata_stats(records)
            fallbacks += report.fallbacks
        write_json(ws.metadata_stats, composition)
        return f"{sum(c['chunks'] for c in composition.values())} chunks enriched, {fallbacks} fallbacks"

    def _run_embed(self) -> str:
        ws = self.workspace
        section = self.config.embedding
        count = 0
        for strategy in CHUNKINGS:
            records = load_enriched(ws.enriched(strategy))
            model = fit_tfidf(records, section.dimension, self.config.seeds.projection)
            save_tfidf(ws.tfidf(strategy), model)
            vectors = embed_enriched(
                records,
                self.embedder,
                model,
                weights=self.weights,
                max_input_tokens=section.max_input_tokens,
                tokenizer=self.tokenizer,
                batch_size=section.batch_size,
                parallelism=self.config.general.parallelism,
            )
            for embedding, items in vectors.items():
                path = ws.embeddings(f"{strategy.value}+{embedding.value}")
                path.parent.mkdir(parents=True, exist_ok=True)
                with open(path, "wb") as f:
                    np.savez(
                        f,
                        ids=np.array([item.owner_id for item in items], dtype=str),
                        vectors=np.vstack([item.values for item in items]),
                    )
                count += len(items)
        return f"{count} vectors"

    def _run_index(self) -> str:
        ws = self.workspace
        stats = {}
        for config in all_configs():
            with np.load(ws.embeddings(config.cell), allow_pickle=False) as data:
                ids, vectors = [str(i) for i in data["ids"]], data["vectors"]
            index = VectorIndex(ids, vectors, config.chunking_strategy, config.embedding_strategy)
            save_index(ws.index(config.cell), index)
            if len(index) >= 2:
                stats[config.cell] = nn_stats(index).to_dict()
            else:
                logger.warning(f"{config.cell}: fewer than 2 vectors, no neighbour statistics")
        write_json(ws.index_stats, stats)
        return f"{len(CELLS)} indexes"

    def load_indexes(self) -> dict[str, VectorIndex]:
        ws = self.workspace
        indexes = {}
        for cell in CELLS:
            path = ws.index(cell)
            if not path.exists():
                continue
            index = load_index(path)
            if index.cell != cell:
                raise IndexFormatError(f"{path}: holds {index.cell}, expected {cell}")
            indexes[cell] = index
        return indexes

    def load_tfidf_models(self) -> dict:
        ws = self.workspace
        return {s: load_tfidf(ws.tfidf(s)) for s in CHUNKINGS if ws.tfidf(s).exists()}

    def _run_retrieve(self) -> str:
        ws = self.workspace
        queries = load_queries(ws.queries)
        results = run_matrix(
            queries,
            self.load_indexes(),
            self.embedder,
            self.load_tfidf_models(),
            configs=all_configs(self.retrieval_depth, self.weights),
            parallelism=self.config.general.parallelism,
        )
        save_results(ws.results, results)
        return f"{len(results)} results ({len(queries)} queries x {len(CELLS)} configurations)"

    def _judged_texts(self) -> dict[ChunkingStrategy, dict[str, str]]:
        view = self.config.evaluation.judged_view
        texts = {}
        for strategy in CHUNKINGS:
            records = load_enriched(self.workspace.enriched(strategy))
            texts[strategy] = {r.chunk_id: _judged_text(r, view) for r in records}
        return texts

    def _run_groundtruth(self) -> str:
        ws = self.workspace
        section = self.config.evaluation
        builder = GroundTruthBuilder(
            get_reranker(self.config),
            pool_size=section.pool_size,
            tau=section.tau,
            percentile=section.highly_relevant_percentile,
            percentile_scope=section.percentile_scope,
            batch_size=section.batch_size,
            max_retries=section.max_retries,
            retry_wait=section.retry_wait_seconds,
        )
        judgments = builder.build(
            load_queries(ws.queries),
            load_results(ws.results),
            self._judged_texts(),
            checkpoint_path=ws.judgment_checkpoint,
        )
        save_judgments(ws.judgments, judgments)
        ws.judgment_checkpoint.unlink(missing_ok=True)
        return f"{len(judgments)} judgments"

    def _run_evaluate(self) -> str:
        ws = self.workspace
        categories = {
            s.value: {r.chunk_id: r.metadata.primary_category for r in load_enriched(ws.enriched(s))}
            for s in CHUNKINGS
        }
        section = self.config.evaluation
        report = evaluate_all(
            load_results(ws.results),
            load_judgments(ws.judgments),
            categories,
            k_values=self.config.retrieval.k_values,
            binary_gain=section.ndcg_gain == "binary",
            settings={
                "tau": section.tau,
                "pool_size": section.pool_size,
                "highly_relevant_percentile": section.highly_relevant_percentile,
                "percentile_scope": section.percentile_scope,
                "ndcg_gain": section.ndcg_gain,
                "judged_view": section.judged_view,
                "fusion_weights": [self.config.embedding.content_weight, self.config.embedding.metadata_weight],
            },
            stats=self._collect_stats(),
        )
        write_json(ws.report_json, report.to_dict())
        ws.report_text.write_text(report_text(report), encoding="utf-8")
        return f"report written to {ws.report_json}"

    def _collect_stats(self) -> dict[str, Any]:
        ws = self.workspace
        stats = {}
        for key, path in (
            ("corpus", ws.corpus_stats),
            ("chunks", ws.chunk_stats),
            ("metadata", ws.metadata_stats),
            ("nearest_neighbor", ws.index_stats),
        ):
            if path.exists():
                stats[key] = read_json(path)
        return stats


def _judged_text(record: EnrichedChunk, view: str) -> str:
    if view == "enriched":
        return render_prefix(record.metadata) + record.chunk.text
    return record.chunk.text


def run_stage(config: PipelineConfig, stage: str, force: bool = False) -> list[StageResult]:
    """Run one stage by name, or every stage for "all"."""
    pipeline = Pipeline(config, force=force)
    if stage == "all":
        return pipeline.run_all()
    try:
        selected = Stage(stage)
    except ValueError:
        raise ValueError(
            f"Unknown stage {stage!r}; expected one of {', '.join(s.value for s in Stage)} or all"
        ) from None
    return [pipeline.run(selected)]


__all__ = ["CELLS", "Pipeline", "Stage", "StageResult", "run_stage"]
