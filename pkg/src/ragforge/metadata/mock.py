"""Deterministic heuristic metadata, used offline and as the failure fallback."""
import re
from collections import Counter

from ragforge.chunking.models import ChunkRecord
from ragforge.chunking.semantic import sentence_spans
from ragforge.chunking.tokenizer import get_tokenizer, word_tokens
from ragforge.vocabulary import ContentType, detect_intent
from .models import ChunkMetadata


MOCK_KEYWORDS = 5
SUMMARY_TOKENS = 30

STOPWORDS = frozenset("""
a about above after again all also an and any are as at be because been before being
below between both but by can could did do does doing down during each few for from
further had has have having here how i if in into is it its itself just may me more
most must my no nor not now of off on once only or other our out over own same
should so some such than that the their them then there these they this those
through to too under until up very was we were what when where which while who why
will with would you your yours
""".split())

IMPERATIVE_VERBS = frozenset("""
add assign attach call check choose click configure copy create define delete deploy
download edit enable enter ensure go install make navigate open pass remove replace
restart run save select set specify start stop type update upload use verify
""".split())

_LIST_MARKER = re.compile(r"^\s*(?:[-*+]|\d+[.)])\s*")
_CODE_MARKERS = (
    re.compile(r"`"),
    re.compile(r"\(\);"),
    re.compile(r"^(?: {4}|\t)\S", re.MULTILINE),
)
_SIGNATURE = re.compile(r"\b[A-Za-z_][\w.]*\([^()\n]*\)|(?<!\w)--[a-z][\w-]*")
_BACKTICKED = re.compile(r"`+([^`\n]+?)`+")
_ENTITY = re.compile(r"\b[A-Z][a-z0-9]*[A-Z0-9][A-Za-z0-9]*\b")
_SERVICE = re.compile(r"\b([A-Za-z][\w-]*) service\b", re.IGNORECASE)
SIGNATURE_DENSITY = 0.05


def has_code(text: str) -> bool:
    return any(marker.search(text) for marker in _CODE_MARKERS)


def classify_content(text: str) -> ContentType:
    """Rule cascade: imperative majority, warning, example, API density, conceptual."""
    sentences = [text[s:e] for s, e in sentence_spans(text)]
    lowered = text.lower()
    imperative = sum(1 for sentence in sentences if _starts_with_imperative(sentence))
    if sentences and imperative * 2 > len(sentences):
        return ContentType.PROCEDURAL
    if "warning" in lowered or "caution" in lowered:
        return ContentType.WARNING
    if "for example" in lowered:
        return ContentType.EXAMPLE
    words = word_tokens(text)
    if words and len(_SIGNATURE.findall(text)) / len(words) >= SIGNATURE_DENSITY:
        return ContentType.REFERENCE
    return ContentType.CONCEPTUAL


def _starts_with_imperative(sentence: str) -> bool:
    words = word_tokens(_LIST_MARKER.sub("", sentence))
    return bool(words) and words[0] in IMPERATIVE_VERBS


def top_keywords(text: str, limit: int = MOCK_KEYWORDS) -> list[str]:
    """Most frequent non-stopword tokens; ties keep first-seen order."""
    counts = Counter(
        token for token in word_tokens(text)
        if token not in STOPWORDS and not token.isdigit() and len(token) > 1
    )
    return [token for token, _ in counts.most_common(limit)]


def first_sentence(text: str, max_tokens: int = SUMMARY_TOKENS) -> str:
    spans = sentence_spans(text)
    sentence = text[spans[0][0]:spans[0][1]] if spans else text.strip()
    return get_tokenizer().truncate(sentence, max_tokens)


def mock_metadata(text: str, source_tag: str = "") -> ChunkMetadata:
    """Heuristic metadata for raw text. Pure function of its arguments."""
    content_type = classify_content(text)
    keywords = top_keywords(text)
    tools = [match.split()[0] for match in _BACKTICKED.findall(text) if match.split()]
    return ChunkMetadata(
        content_type=content_type,
        keywords=keywords,
        entities=_ENTITY.findall(text),
        has_code=has_code(text),
        primary_category=source_tag or "general",
        secondary_categories=[content_type.value],
        services=[
            f"{name.lower()} service" for name in _SERVICE.findall(text)
            if name.lower() not in STOPWORDS
        ],
        tools=tools,
        summary=first_sentence(text) or "(empty)",
        intents=[detect_intent(text) if text.strip() else "reference"],
        questions=[f"What does the documentation say about {keyword}?" for keyword in keywords[:2]],
    )


def mock_enrich(chunk: ChunkRecord) -> ChunkMetadata:
    """Heuristic metadata for a chunk; primary_category is its source tag."""
    return mock_metadata(chunk.text, chunk.source_tag)
