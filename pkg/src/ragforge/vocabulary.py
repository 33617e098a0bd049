"""Closed vocabularies shared by metadata generation and retrieval."""
from enum import Enum


class ContentType(str, Enum):
    PROCEDURAL = "procedural"
    CONCEPTUAL = "conceptual"
    REFERENCE = "reference"
    WARNING = "warning"
    EXAMPLE = "example"


class Intent(str, Enum):
    HOW_TO = "how-to"
    DEBUGGING = "debugging"
    COMPARISON = "comparison"
    REFERENCE = "reference"


# First match wins; matching is case-insensitive substring search.
INTENT_RULES: tuple[tuple[Intent, tuple[str, ...]], ...] = (
    (Intent.HOW_TO, ("how do i", "how to", "steps", "configure", "set up", "enable")),
    (Intent.DEBUGGING, ("error", "fail", "fix", "debug", "not working", "troubleshoot")),
    (Intent.COMPARISON, (" vs ", "difference", "compare", "versus", "better")),
)


def detect_intent(query_text: str) -> Intent:
    """Classify a query with the first matching rule; falls back to reference."""
    if not query_text.strip():
        raise ValueError("query text is empty")
    lowered = query_text.lower()
    for intent, markers in INTENT_RULES:
        if any(marker in lowered for marker in markers):
            return intent
    return Intent.REFERENCE
