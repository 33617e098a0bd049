"""Batched metadata enrichment with retries, fallbacks and resumable checkpoints."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence, TypeVar

from tenacity import Retrying, retry_if_exception_type, stop_after_attempt, wait_exponential

from ragforge.chunking.models import ChunkRecord
from ragforge.chunking.tokenizer import Tokenizer
from ragforge.errors import (
    EnrichmentAborted,
    ProviderError,
    ProviderUnavailableError,
    RetryableParseError,
)
from ragforge.jsonl import append_jsonl, read_jsonl, write_jsonl
from .mock import mock_enrich
from .models import EnrichedChunk
from .parser import parse_metadata
from .prompts import build_prompt
from .providers import BaseChatProvider


logger = logging.getLogger(__name__)

FALLBACK_TAG = "fallback-mock"

T = TypeVar("T")


def make_batches(items: Sequence[T], batch_size: int) -> list[list[T]]:
    """Split items into consecutive batches of ``batch_size`` (last may be short)."""
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    return [list(items[i:i + batch_size]) for i in range(0, len(items), batch_size)]


@dataclass
class EnrichmentReport:
    """Outcome counts for one enrichment run."""
    total: int = 0
    resumed: int = 0
    retries: int = 0
    batch_sizes: list[int] = field(default_factory=list)
    coercions: list[str] = field(default_factory=list)
    failures: list[dict[str, str]] = field(default_factory=list)

    @property
    def fallbacks(self) -> int:
        return len(self.failures)

    def to_dict(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "resumed": self.resumed,
            "retries": self.retries,
            "fallbacks": self.fallbacks,
            "batch_sizes": self.batch_sizes,
            "coercions": self.coercions,
            "failures": self.failures,
        }


@dataclass
class _Outcome:
    record: Optional[EnrichedChunk]
    retries: int
    warnings: list[str]
    error: Optional[Exception] = None


class MetadataEnricher:
    """
    Enrich chunks through a chat provider.

    Chunks are grouped into consecutive batches; requests within a batch run
    concurrently up to ``parallelism``. Each chunk is retried up to
    ``max_retries`` times on parse or transport errors, then replaced by
    heuristic metadata tagged ``fallback-mock``. If the provider is still
    unreachable after retries, completed records are flushed to the
    checkpoint and EnrichmentAborted is raised.
    """

    def __init__(
        self,
        provider: BaseChatProvider,
        batch_size: int = 16,
        max_retries: int = 2,
        parallelism: int = 4,
        retry_wait: float = 1.0,
        temperature: float = 0.5,
        max_output_tokens: int = 800,
        prompt_token_budget: int = 1536,
        tokenizer: Optional[Tokenizer] = None,
    ):
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        if max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {max_retries}")
        self.provider = provider
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.parallelism = max(1, parallelism)
        self.retry_wait = retry_wait
        self.temperature = temperature
        self.max_output_tokens = max_output_tokens
        self.prompt_token_budget = prompt_token_budget
        self.tokenizer = tokenizer

    def enrich(
        self,
        chunks: Iterable[ChunkRecord],
        checkpoint_path: Optional[Path] = None,
        on_progress: Optional[Callable[[int], None]] = None,
    ) -> tuple[list[EnrichedChunk], EnrichmentReport]:
        chunks = list(chunks)
        report = EnrichmentReport(total=len(chunks))
        done = load_checkpoint(checkpoint_path, chunks) if checkpoint_path else {}
        report.resumed = len(done)
        if done:
            logger.info(f"Resuming enrichment: {len(done)} of {len(chunks)} chunks already done")

        pending = [chunk for chunk in chunks if chunk.chunk_id not in done]
        batches = make_batches(pending, self.batch_size)
        report.batch_sizes = [len(batch) for batch in batches]

        with ThreadPoolExecutor(max_workers=self.parallelism) as executor:
            for batch_number, batch in enumerate(batches, start=1):
                outcomes = list(executor.map(self._enrich_one, batch))
                completed = [o.record for o in outcomes if o.record is not None]

                for chunk, outcome in zip(batch, outcomes):
                    report.retries += outcome.retries
                    report.coercions.extend(f"{chunk.chunk_id}: {w}" for w in outcome.warnings)
                    if outcome.record is not None and outcome.record.generator_tag == FALLBACK_TAG:
                        report.failures.append(
                            {"chunk_id": chunk.chunk_id, "error": str(outcome.error)}
                        )

                done.update((record.chunk_id, record) for record in completed)
                if checkpoint_path:
                    append_jsonl(checkpoint_path, (record.to_dict() for record in completed))

                unreachable = [o for o in outcomes if o.record is None]
                if unreachable:
                    raise EnrichmentAborted(
                        f"Chat provider unreachable: {unreachable[0].error}; "
                        f"{len(done)} of {len(chunks)} chunks saved",
                        checkpoint_path=checkpoint_path,
                        completed=len(done),
                    )
                logger.debug(f"Batch {batch_number}/{len(batches)}: {len(batch)} chunks enriched")
                if on_progress:
                    on_progress(len(batch))

        if report.failures:
            logger.warning(f"{report.fallbacks} chunks fell back to heuristic metadata")
        return [done[chunk.chunk_id] for chunk in chunks], report

    def _enrich_one(self, chunk: ChunkRecord) -> _Outcome:
        prompt = build_prompt(chunk, self.prompt_token_budget, self.tokenizer)
        warnings: list[str] = []
        attempts = 0
        retrying = Retrying(
            stop=stop_after_attempt(self.max_retries + 1),
            wait=wait_exponential(multiplier=self.retry_wait, max=max(self.retry_wait * 8, 0)),
            retry=retry_if_exception_type((RetryableParseError, ProviderError)),
            reraise=True,
        )
        try:
            for attempt in retrying:
                with attempt:
                    attempts = attempt.retry_state.attempt_number
                    warnings = []
                    text = self.provider.complete(
                        prompt.system,
                        prompt.user,
                        temperature=self.temperature,
                        max_tokens=self.max_output_tokens,
                    )
                    metadata = parse_metadata(text, warnings)
        except ProviderUnavailableError as e:
            logger.error(f"{chunk.chunk_id}: provider unreachable after {attempts} attempts: {e}")
            return _Outcome(None, attempts - 1, [], e)
        except (RetryableParseError, ProviderError) as e:
            logger.warning(f"{chunk.chunk_id}: enrichment failed after {attempts} attempts: {e}")
            fallback = EnrichedChunk(chunk, mock_enrich(chunk), FALLBACK_TAG)
            return _Outcome(fallback, attempts - 1, [], e)

        return _Outcome(EnrichedChunk(chunk, metadata, self.provider.name), attempts - 1, warnings)


def enrich_chunks(
    chunks: Iterable[ChunkRecord],
    provider: BaseChatProvider,
    batch_size: int = 16,
    max_retries: int = 2,
    **kwargs: Any,
) -> list[EnrichedChunk]:
    """
    Enrich chunks through a chat provider.

    Args:
        chunks: Chunks to enrich.
        provider: Chat provider that returns the metadata JSON.
        batch_size: Chunks per batch.
        max_retries: Attempts per chunk before falling back to heuristic
            metadata.
        **kwargs: Other MetadataEnricher options, plus ``checkpoint_path``
            to resume from and flush completed records to.

    Returns:
        One enriched record per chunk, in input order.

    Raises:
        EnrichmentAborted: The provider stayed unreachable after retries.
    """
    checkpoint_path = kwargs.pop("checkpoint_path", None)
    enricher = MetadataEnricher(provider, batch_size=batch_size, max_retries=max_retries, **kwargs)
    records, _ = enricher.enrich(chunks, checkpoint_path=checkpoint_path)
    return records


def load_checkpoint(path: Path, chunks: Sequence[ChunkRecord]) -> dict[str, EnrichedChunk]:
    """Completed records from a checkpoint whose chunk text still matches."""
    path = Path(path)
    if not path.exists():
        return {}
    current = {chunk.chunk_id: chunk.text for chunk in chunks}
    done = {}
    for line_number, data in read_jsonl(path):
        record = EnrichedChunk.from_dict(data)
        if current.get(record.chunk_id) == record.chunk.text:
            done[record.chunk_id] = record
        else:
            logger.debug(f"{path}: line {line_number}: stale checkpoint record {record.chunk_id}")
    return done


def save_enriched(path: Path, records: Iterable[EnrichedChunk]) -> int:
    return write_jsonl(path, (record.to_dict() for record in records))


def load_enriched(path: Path) -> list[EnrichedChunk]:
    return [EnrichedChunk.from_dict(data) for _, data in read_jsonl(path)]
