"""Configuration management for ragforge."""
import json
import os
import re
from enum import Enum
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, PrivateAttr, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

try:
    import tomli
except ImportError:
    import tomllib as tomli

from ragforge.chunking.models import ChunkingConfig, ChunkingStrategy
from ragforge.errors import ConfigError


API_KEY_ENV = "RAGFORGE_API_KEY"
_ENV_REF = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


class ProviderKind(str, Enum):
    """Provider backends."""
    MOCK = "mock"  # deterministic, offline
    HTTP = "http"  # JSON-over-HTTP, OpenAI-style wire contract


class GeneralConfig(BaseModel):
    workspace_dir: str = "./workspace"
    log_level: str = "INFO"
    parallelism: int = Field(default=4, ge=1)


class SourceConfig(BaseModel):
    path: str
    source_tag: str


class CorpusConfig(BaseModel):
    corpus_id: str = "corpus"
    sources: list[SourceConfig] = Field(default_factory=list)
    queries_path: Optional[str] = None


class TokenizerConfig(BaseModel):
    name: Literal["regex", "whitespace"] = "regex"


class StrategyConfig(BaseModel):
    """Size limits for one chunking strategy."""
    max_tokens: int = Field(ge=1)
    overlap_tokens: int = Field(default=0, ge=0)
    min_tokens: int = Field(default=0, ge=0)
    breakpoint_percentile: float = Field(default=25.0, gt=0, lt=100)


class ChunkingSection(BaseModel):
    recursive: StrategyConfig = Field(
        default_factory=lambda: StrategyConfig(max_tokens=512, overlap_tokens=128)
    )
    naive: StrategyConfig = Field(default_factory=lambda: StrategyConfig(max_tokens=1024))
    semantic: StrategyConfig = Field(
        default_factory=lambda: StrategyConfig(
            max_tokens=1024, min_tokens=64, breakpoint_percentile=25.0
        )
    )

    def for_strategy(self, strategy: ChunkingStrategy) -> ChunkingConfig:
        section: StrategyConfig = getattr(self, strategy.value)
        return ChunkingConfig(
            strategy=strategy,
            max_tokens=section.max_tokens,
            overlap_tokens=section.overlap_tokens,
            min_tokens=section.min_tokens,
            breakpoint_percentile=section.breakpoint_percentile,
        )


class MetadataSection(BaseModel):
    """LLM metadata generation."""
    provider: ProviderKind = ProviderKind.MOCK
    model: str = "gpt-4o-2024-05-13"
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    api_key: Optional[str] = None
    temperature: float = Field(default=0.5, ge=0.0, le=2.0)
    max_output_tokens: int = 800
    prompt_token_budget: int = 1536
    batch_size: int = Field(default=16, ge=1)
    max_retries: int = Field(default=2, ge=0)
    retry_wait_seconds: float = Field(default=1.0, ge=0.0)
    timeout_seconds: float = 120.0


class EmbeddingSection(BaseModel):
    provider: ProviderKind = ProviderKind.MOCK
    model: str = "snowflake-arctic-embed-m"
    endpoint: str = "https://api.openai.com/v1/embeddings"
    api_key: Optional[str] = None
    dimension: int = Field(default=1536, ge=8)
    max_input_tokens: int = 2048
    content_weight: float = Field(default=0.7, ge=0.0)
    metadata_weight: float = Field(default=0.3, ge=0.0)
    batch_size: int = Field(default=32, ge=1)
    max_retries: int = Field(default=3, ge=0)
    retry_wait_seconds: float = Field(default=1.0, ge=0.0)
    timeout_seconds: float = 60.0

    @model_validator(mode="after")
    def _weights_sum_to_one(self) -> "EmbeddingSection":
        if abs(self.content_weight + self.metadata_weight - 1.0) > 1e-9:
            raise ValueError("content_weight + metadata_weight must equal 1")
        return self


class RetrievalSection(BaseModel):
    k_values: list[int] = Field(default_factory=lambda: [1, 5, 10])

    @field_validator("k_values")
    @classmethod
    def _positive(cls, values: list[int]) -> list[int]:
        if not values or any(k < 1 for k in values):
            raise ValueError("k_values must be a non-empty list of integers >= 1")
        return sorted(set(values))


class EvaluationSection(BaseModel):
    """Ground truth and metric settings."""
    provider: ProviderKind = ProviderKind.MOCK
    model: str = "BAAI/bge-reranker-base"
    endpoint: str = "http://localhost:8787/rerank"
    api_key: Optional[str] = None
    tau: float = Field(default=0.8, ge=0.0, le=1.0)
    pool_size: int = Field(default=50, ge=1)
    highly_relevant_percentile: float = Field(default=95.0, gt=0, lt=100)
    percentile_scope: Literal["query", "global"] = "query"
    ndcg_gain: Literal["graded", "binary"] = "graded"
    # "enriched" judges the rendered metadata header plus the chunk text
    judged_view: Literal["content", "enriched"] = "content"
    batch_size: int = Field(default=32, ge=1)
    max_retries: int = Field(default=3, ge=0)
    retry_wait_seconds: float = Field(default=1.0, ge=0.0)
    timeout_seconds: float = 60.0


class SeedsSection(BaseModel):
    projection: int = 13
    mock: int = 7


class PipelineConfig(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="RAGFORGE_", env_nested_delimiter="__")

    general: GeneralConfig = Field(default_factory=GeneralConfig)
    corpus: CorpusConfig = Field(default_factory=CorpusConfig)
    tokenizer: TokenizerConfig = Field(default_factory=TokenizerConfig)
    chunking: ChunkingSection = Field(default_factory=ChunkingSection)
    metadata: MetadataSection = Field(default_factory=MetadataSection)
    embedding: EmbeddingSection = Field(default_factory=EmbeddingSection)
    retrieval: RetrievalSection = Field(default_factory=RetrievalSection)
    evaluation: EvaluationSection = Field(default_factory=EvaluationSection)
    seeds: SeedsSection = Field(default_factory=SeedsSection)

    _base_dir: Path = PrivateAttr(default_factory=Path.cwd)

    @classmethod
    def load(cls, config_path: Optional[Path] = None) -> "PipelineConfig":
        """Load config from a JSON or TOML file, or use defaults."""
        if config_path is None:
            return cls()

        config_path = Path(config_path).expanduser()
        if not config_path.exists():
            raise ConfigError(f"Config file not found: {config_path}")

        try:
            if config_path.suffix.lower() == ".toml":
                with open(config_path, "rb") as f:
                    data = tomli.load(f)
            else:
                data = json.loads(config_path.read_text(encoding="utf-8"))
        except (ValueError, tomli.TOMLDecodeError) as e:
            raise ConfigError(f"Cannot parse {config_path}: {e}") from e

        try:
            config = cls(**interpolate_env(data))
        except ValueError as e:
            raise ConfigError(f"Invalid config {config_path}: {e}") from e
        config._base_dir = config_path.resolve().parent
        return config

    def resolve_path(self, value: str | Path) -> Path:
        """Resolve a config path relative to the config file's directory."""
        path = Path(value).expanduser()
        return path if path.is_absolute() else (self._base_dir / path)

    def get_workspace_dir(self) -> Path:
        return self.resolve_path(self.general.workspace_dir)

    def chunking_config(self, strategy: ChunkingStrategy) -> ChunkingConfig:
        return self.chunking.for_strategy(strategy)

    def api_key_for(self, section: str) -> Optional[str]:
        """API key for a provider section ("metadata", "embedding", "evaluation")."""
        override_env = {
            "metadata": "RAGFORGE_CHAT_API_KEY",
            "embedding": "RAGFORGE_EMBED_API_KEY",
            "evaluation": "RAGFORGE_RERANK_API_KEY",
        }[section]
        explicit = getattr(self, section).api_key
        return explicit or os.getenv(override_env) or os.getenv(API_KEY_ENV)

    def check_credentials(self) -> None:
        """Fail fast when a remote provider is configured without a key."""
        missing = [
            section
            for section in ("metadata", "embedding", "evaluation")
            if getattr(self, section).provider == ProviderKind.HTTP and not self.api_key_for(section)
        ]
        if missing:
            raise ConfigError(
                f"Missing API key for {', '.join(missing)} provider; set {API_KEY_ENV}"
            )

    def masked_dump(self) -> dict[str, Any]:
        """Config as a dict with secrets hidden."""
        data = self.model_dump(mode="json")
        for section in ("metadata", "embedding", "evaluation"):
            if data[section].get("api_key"):
                data[section]["api_key"] = "***"
        return data


def interpolate_env(value: Any) -> Any:
    """Replace ${VAR} references in string values with environment values."""
    if isinstance(value, str):
        return _ENV_REF.sub(lambda m: os.getenv(m.group(1), ""), value)
    if isinstance(value, dict):
        return {k: interpolate_env(v) for k, v in value.items()}
    if isinstance(value, list):
        return [interpolate_env(v) for v in value]
    return value


# Global config instance
_config: Optional[PipelineConfig] = None


def get_config() -> PipelineConfig:
    """Get the global config instance."""
    global _config
    if _config is None:
        _config = PipelineConfig()
    return _config


def set_config(config: PipelineConfig) -> None:
    """Set the global config instance."""
    global _config
    _config = config
