"""Tokenizers shared by every stage.

A token is the unit of all size limits. Tokenizers here are span-aware:
``spans(text)`` returns the ``[start, end)`` character offsets of each
token, so a contiguous run of tokens can always be cut back out of the
source text.
"""
import re
from functools import lru_cache
from typing import Optional


class Tokenizer:
    """Regex tokenizer. Subclasses only change ``PATTERN``."""

    name = "regex"
    # Runs of word characters, or runs of non-space non-word characters.
    PATTERN = re.compile(r"\w+|[^\w\s]+")

    def spans(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in self.PATTERN.finditer(text)]

    def tokenize(self, text: str) -> list[str]:
        return self.PATTERN.findall(text)

    def count(self, text: str) -> int:
        return sum(1 for _ in self.PATTERN.finditer(text))

    def truncate(self, text: str, max_tokens: int) -> str:
        """Cut text after its first ``max_tokens`` tokens."""
        if max_tokens <= 0:
            return ""
        spans = self.spans(text)
        if len(spans) <= max_tokens:
            return text
        return text[: spans[max_tokens - 1][1]]

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class WhitespaceTokenizer(Tokenizer):
    """Whitespace-delimited tokens."""

    name = "whitespace"
    PATTERN = re.compile(r"\S+")


_TOKENIZERS: dict[str, type[Tokenizer]] = {
    Tokenizer.name: Tokenizer,
    WhitespaceTokenizer.name: WhitespaceTokenizer,
}


@lru_cache(maxsize=None)
def get_tokenizer(name: Optional[str] = None) -> Tokenizer:
    """Shared tokenizer instance by name (default: regex)."""
    name = name or Tokenizer.name
    try:
        return _TOKENIZERS[name]()
    except KeyError:
        raise ValueError(f"Unknown tokenizer: {name!r} (known: {sorted(_TOKENIZERS)})")


WORD_PATTERN = re.compile(r"\w")


def word_tokens(text: str, tokenizer: Optional[Tokenizer] = None) -> list[str]:
    """Lowercased tokens that contain at least one word character."""
    tokenizer = tokenizer or get_tokenizer()
    return [t.lower() for t in tokenizer.tokenize(text) if WORD_PATTERN.search(t)]
