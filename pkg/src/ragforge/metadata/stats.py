"""Composition statistics over enriched chunks."""
from collections import Counter
from typing import Any, Sequence

from ragforge.vocabulary import ContentType, Intent
from .models import EnrichedChunk


def metadata_stats(records: Sequence[EnrichedChunk]) -> dict[str, Any]:
    """Content-type and intent distributions, code fraction and keyword counts."""
    n = len(records)
    content_types = Counter(r.metadata.content_type for r in records)
    intents = Counter(i for r in records for i in r.metadata.intents)
    generators = Counter(r.generator_tag for r in records)
    return {
        "chunks": n,
        "content_types": {t.value: content_types.get(t, 0) for t in ContentType},
        "intents": {i.value: intents.get(i, 0) for i in Intent},
        "has_code_fraction": (sum(r.metadata.has_code for r in records) / n) if n else 0.0,
        "mean_keywords": (sum(len(r.metadata.keywords) for r in records) / n) if n else 0.0,
        "generators": dict(sorted(generators.items())),
    }
