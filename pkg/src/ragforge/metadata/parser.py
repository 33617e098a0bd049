"""Parsing and validation of LLM metadata responses."""
import json
import logging
import re
from typing import Any, Optional

from pydantic import ValidationError

from ragforge.errors import RetryableParseError
from ragforge.vocabulary import ContentType, Intent
from .models import ChunkMetadata


logger = logging.getLogger(__name__)

_FENCE = re.compile(r"^\s*```[a-zA-Z0-9_-]*\s*\n?(.*?)\n?\s*```\s*$", re.DOTALL)
_LIST_FIELDS = (
    "keywords", "entities", "secondary_categories", "services", "tools", "questions", "intents",
)


def strip_code_fences(text: str) -> str:
    match = _FENCE.match(text)
    return match.group(1) if match else text.strip()


def parse_metadata(response_text: str, warnings: Optional[list[str]] = None) -> ChunkMetadata:
    """
    Parse an LLM response into validated metadata.

    Unknown content types are coerced to "reference" and unknown intents are
    dropped; each coercion is logged and appended to ``warnings`` if given.
    Unparseable or schema-violating responses raise RetryableParseError.
    """
    warnings = warnings if warnings is not None else []
    body = strip_code_fences(response_text)
    try:
        data = json.loads(body)
    except json.JSONDecodeError as e:
        raise RetryableParseError(f"Response is not JSON: {e.msg} at position {e.pos}") from e
    if not isinstance(data, dict):
        raise RetryableParseError(f"Expected a JSON object, got {type(data).__name__}")

    data = _normalize(data, warnings)
    try:
        return ChunkMetadata.model_validate(data)
    except ValidationError as e:
        raise RetryableParseError(f"Metadata failed validation: {e.error_count()} errors") from e


def _normalize(data: dict[str, Any], warnings: list[str]) -> dict[str, Any]:
    data = dict(data)

    for name in _LIST_FIELDS:
        value = data.get(name)
        if value is None:
            data[name] = []
        elif isinstance(value, str):
            data[name] = [value]
        elif isinstance(value, list):
            data[name] = [str(v) for v in value if v is not None]

    content_type = str(data.get("content_type", "")).strip().lower()
    if content_type not in {t.value for t in ContentType}:
        message = f"unknown content_type {data.get('content_type')!r} coerced to 'reference'"
        logger.warning(message)
        warnings.append(message)
        content_type = ContentType.REFERENCE.value
    data["content_type"] = content_type

    known = {i.value for i in Intent}
    intents = []
    for raw in data["intents"]:
        value = raw.strip().lower()
        if value in known:
            intents.append(value)
        else:
            message = f"unknown intent {raw!r} dropped"
            logger.warning(message)
            warnings.append(message)
    if not intents:
        intents = [Intent.REFERENCE.value]
    data["intents"] = intents

    if isinstance(data.get("has_code"), str):
        data["has_code"] = data["has_code"].strip().lower() in {"true", "yes", "1"}
    return data
