"""Metadata schema and enriched chunk records."""
from dataclasses import dataclass
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ragforge.chunking.models import ChunkRecord
from ragforge.vocabulary import ContentType, Intent


MAX_KEYWORDS = 10
MAX_QUESTIONS = 5
MAX_INTENTS = 4
MAX_ENTITIES = 20


def _unique(values: list[str], limit: int, lower: bool = False) -> list[str]:
    seen: dict[str, None] = {}
    for value in values:
        value = value.strip()
        if lower:
            value = value.lower()
        if value and value not in seen:
            seen[value] = None
    return list(seen)[:limit]


class ChunkMetadata(BaseModel):
    """Content, technical and semantic annotations for one chunk."""

    model_config = ConfigDict(use_enum_values=False, extra="ignore")

    # content
    content_type: ContentType
    keywords: list[str] = Field(default_factory=list)
    entities: list[str] = Field(default_factory=list)
    has_code: bool = False
    # technical
    primary_category: str = "general"
    secondary_categories: list[str] = Field(default_factory=list)
    services: list[str] = Field(default_factory=list)
    tools: list[str] = Field(default_factory=list)
    # semantic
    summary: str
    intents: list[Intent] = Field(min_length=1)
    questions: list[str] = Field(default_factory=list)

    @field_validator("keywords")
    @classmethod
    def _keywords(cls, values: list[str]) -> list[str]:
        return _unique(values, MAX_KEYWORDS, lower=True)

    @field_validator("entities")
    @classmethod
    def _entities(cls, values: list[str]) -> list[str]:
        return _unique(values, MAX_ENTITIES)

    @field_validator("secondary_categories", "services", "tools")
    @classmethod
    def _dedupe(cls, values: list[str]) -> list[str]:
        return _unique(values, MAX_ENTITIES)

    @field_validator("questions")
    @classmethod
    def _questions(cls, values: list[str]) -> list[str]:
        return _unique(values, MAX_QUESTIONS)

    @field_validator("intents")
    @classmethod
    def _intents(cls, values: list[Intent]) -> list[Intent]:
        return list(dict.fromkeys(values))[:MAX_INTENTS]

    @field_validator("primary_category")
    @classmethod
    def _category(cls, value: str) -> str:
        value = value.strip()
        return value or "general"

    @field_validator("summary")
    @classmethod
    def _summary(cls, value: str) -> str:
        value = " ".join(value.split())
        if not value:
            raise ValueError("summary must not be empty")
        return value

    def to_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json")

    def text_fields(self) -> list[str]:
        """Metadata text used for TF-IDF, in a fixed field order."""
        return [
            *self.keywords,
            *self.entities,
            self.primary_category,
            *self.secondary_categories,
            *self.services,
            *self.tools,
            *(intent.value for intent in self.intents),
            self.summary,
        ]


@dataclass
class EnrichedChunk:
    """A chunk stored alongside its generated metadata."""
    chunk: ChunkRecord
    metadata: ChunkMetadata
    generator_tag: str  # model name, "mock" or "fallback-mock"

    @property
    def chunk_id(self) -> str:
        return self.chunk.chunk_id

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.chunk.to_dict(),
            "metadata": self.metadata.to_dict(),
            "generator_tag": self.generator_tag,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EnrichedChunk":
        return cls(
            chunk=ChunkRecord.from_dict(data),
            metadata=ChunkMetadata.model_validate(data["metadata"]),
            generator_tag=data["generator_tag"],
        )
