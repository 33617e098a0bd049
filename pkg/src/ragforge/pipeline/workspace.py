"""Workspace layout: where every stage reads and writes its artifacts."""
from pathlib import Path

from ragforge.chunking.models import ChunkingStrategy
from ragforge.errors import ArtifactMissingError


class Workspace:
    """Paths of all stage artifacts under one root directory."""

    def __init__(self, root: Path):
        self.root = Path(root)

    # ingest
    @property
    def corpus(self) -> Path:
        return self.root / "corpus.jsonl"

    @property
    def queries(self) -> Path:
        return self.root / "queries.jsonl"

    @property
    def corpus_stats(self) -> Path:
        return self.root / "corpus_stats.json"

    # chunk
    def chunks(self, strategy: ChunkingStrategy) -> Path:
        return self.root / "chunks" / f"{strategy.value}.jsonl"

    @property
    def chunk_stats(self) -> Path:
        return self.root / "chunks" / "stats.json"

    # enrich
    def enriched(self, strategy: ChunkingStrategy) -> Path:
        return self.root / "enriched" / f"{strategy.value}.jsonl"

    def enrich_failures(self, strategy: ChunkingStrategy) -> Path:
        return self.root / "enriched" / f"failures_{strategy.value}.json"

    def enrich_checkpoint(self, strategy: ChunkingStrategy) -> Path:
        return self.root / "enriched" / f"checkpoint_{strategy.value}.jsonl"

    @property
    def metadata_stats(self) -> Path:
        return self.root / "enriched" / "stats.json"

    # embed
    def tfidf(self, strategy: ChunkingStrategy) -> Path:
        return self.root / "tfidf" / f"{strategy.value}.json"

    def embeddings(self, cell: str) -> Path:
        return self.root / "embeddings" / f"{cell}.npz"

    # index
    def index(self, cell: str) -> Path:
        return self.root / "index" / f"{cell}.idx"

    @property
    def index_stats(self) -> Path:
        return self.root / "index" / "stats.json"

    # retrieve / groundtruth / evaluate
    @property
    def results(self) -> Path:
        return self.root / "results" / "results.jsonl"

    @property
    def judgments(self) -> Path:
        return self.root / "judgments.jsonl"

    @property
    def judgment_checkpoint(self) -> Path:
        return self.root / "judgments_checkpoint.jsonl"

    @property
    def report_json(self) -> Path:
        return self.root / "report.json"

    @property
    def report_text(self) -> Path:
        return self.root / "report.txt"

    def stamp(self, stage: str) -> Path:
        return self.root / "stamps" / f"{stage}.json"

    def require(self, stage: str, *paths: Path) -> None:
        """Raise ArtifactMissingError naming ``stage`` if any path is missing."""
        missing = [path for path in paths if not path.exists()]
        if missing:
            raise ArtifactMissingError(stage, missing[0])
