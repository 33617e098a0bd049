"""Prompt construction for metadata extraction."""
import json
from dataclasses import dataclass
from typing import Optional

from ragforge.chunking.models import ChunkRecord
from ragforge.chunking.tokenizer import Tokenizer, get_tokenizer
from ragforge.vocabulary import ContentType, Intent
from .models import MAX_INTENTS, MAX_KEYWORDS, MAX_QUESTIONS


TRUNCATION_MARKER = "\n[... truncated]"
SOURCE_LINE = "Source category hint: "
CHUNK_HEADER = "CHUNK:\n"

_SCHEMA = {
    "content_type": f"one of {[t.value for t in ContentType]}",
    "keywords": f"list of up to {MAX_KEYWORDS} lowercase keywords",
    "entities": "list of named entities (products, APIs, standards)",
    "has_code": "true if the chunk contains a code example",
    "primary_category": "main technical category",
    "secondary_categories": "list of further categories",
    "services": "list of services mentioned",
    "tools": "list of technical tools, CLIs or SDKs referenced",
    "summary": "one or two sentence summary",
    "intents": f"non-empty list of up to {MAX_INTENTS} values from {[i.value for i in Intent]}",
    "questions": f"list of up to {MAX_QUESTIONS} user questions this chunk answers",
}

SYSTEM_PROMPT = (
    "You annotate technical documentation chunks for a retrieval system.\n"
    "Return ONLY a JSON object, no prose and no code fences, with exactly these fields:\n"
    f"{json.dumps(_SCHEMA, indent=2)}\n"
    "Allowed content_type values: "
    + ", ".join(t.value for t in ContentType)
    + ".\nAllowed intents values: "
    + ", ".join(i.value for i in Intent)
    + "."
)


@dataclass(frozen=True)
class PromptPair:
    system: str
    user: str


def build_prompt(
    chunk: ChunkRecord,
    token_budget: int = 1536,
    tokenizer: Optional[Tokenizer] = None,
) -> PromptPair:
    """System prompt fixes the schema; user prompt carries the chunk text last."""
    if not chunk.text.strip():
        raise ValueError(f"Chunk {chunk.chunk_id} has no text")
    tokenizer = tokenizer or get_tokenizer()

    text = chunk.text
    if tokenizer.count(text) > token_budget:
        text = tokenizer.truncate(text, token_budget) + TRUNCATION_MARKER

    user = (
        f"{SOURCE_LINE}{chunk.source_tag or 'general'}\n"
        "Extract the metadata for the documentation chunk below.\n\n"
        f"{CHUNK_HEADER}{text}"
    )
    return PromptPair(system=SYSTEM_PROMPT, user=user)


def split_user_prompt(user: str) -> tuple[str, str]:
    """Recover (source_tag, chunk text) from a user prompt built above."""
    first_line, _, rest = user.partition("\n")
    source_tag = first_line[len(SOURCE_LINE):] if first_line.startswith(SOURCE_LINE) else ""
    _, _, text = rest.partition(CHUNK_HEADER)
    if text.endswith(TRUNCATION_MARKER):
        text = text[: -len(TRUNCATION_MARKER)]
    return source_tag, text
