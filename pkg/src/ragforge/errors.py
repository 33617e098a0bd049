"""Exception hierarchy for ragforge."""


class RagforgeError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(RagforgeError):
    """Invalid or incomplete configuration."""


class CorpusError(RagforgeError):
    """A source file could not be ingested, or a corpus file is malformed."""


class ChunkingError(RagforgeError):
    """Chunking failed for a document."""


class RetryableParseError(RagforgeError):
    """LLM response could not be parsed into metadata; worth asking again."""


class ProviderError(RagforgeError):
    """A provider request failed (HTTP error, bad payload, timeout)."""


class ProviderUnavailableError(ProviderError):
    """The provider endpoint cannot be reached at all."""


class EnrichmentAborted(RagforgeError):
    """Enrichment stopped early; completed records are in the checkpoint."""

    def __init__(self, message: str, checkpoint_path=None, completed: int = 0):
        super().__init__(message)
        self.checkpoint_path = checkpoint_path
        self.completed = completed


class EmbeddingError(RagforgeError):
    """Embedding or fusion failed."""


class IndexFormatError(RagforgeError):
    """Index file is truncated, corrupt or of an unsupported version."""


class RetrievalError(RagforgeError):
    """Retrieval matrix is incomplete or a query failed."""


class EvaluationError(RagforgeError):
    """Ground truth or metric computation failed."""


class ArtifactMissingError(RagforgeError):
    """A stage's input artifact does not exist in the workspace."""

    def __init__(self, stage: str, path=None):
        super().__init__(f"{stage} artifacts missing; run `ragforge run {stage}` first")
        self.stage = stage
        self.path = path
