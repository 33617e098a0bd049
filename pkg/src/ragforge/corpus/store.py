"""Corpus ingestion and JSONL persistence."""
import json
import logging
from collections import Counter
from pathlib import Path
from typing import Optional

from ragforge.chunking.tokenizer import Tokenizer, get_tokenizer
from ragforge.errors import CorpusError
from ragforge.jsonl import atomic_writer, dumps
from .models import Corpus, Document
from .readers import get_registry


logger = logging.getLogger(__name__)

CORPUS_FORMAT = "ragforge-corpus"
CORPUS_VERSION = 1


def ingest_directory(path: Path, source_tag: str, corpus_id: Optional[str] = None) -> Corpus:
    """Build a corpus from every readable file under ``path``.

    Files are visited in sorted relative-path order so ids and ordering depend
    only on directory contents.
    """
    root = Path(path)
    if not root.is_dir():
        raise CorpusError(f"Not a directory: {root}")

    registry = get_registry()
    files = sorted(
        (p for p in root.rglob("*") if p.is_file() and registry.can_read(p)),
        key=lambda p: p.relative_to(root).as_posix(),
    )

    corpus = Corpus(corpus_id or source_tag)
    for file_path in files:
        relative = file_path.relative_to(root).as_posix()
        for doc in registry.get_reader(file_path).read(file_path, relative, source_tag):
            corpus.add(doc)

    if not len(corpus):
        raise CorpusError(f"no documents in {root}")

    logger.info(f"Ingested {len(corpus)} documents from {root} as '{source_tag}'")
    return corpus


def ingest_sources(sources: list[tuple[Path, str]], corpus_id: str) -> Corpus:
    """Ingest several tagged directories into one corpus."""
    corpus = Corpus(corpus_id)
    for path, source_tag in sources:
        corpus = corpus.merge(ingest_directory(path, source_tag))
    return corpus


def save_corpus(path: Path, corpus: Corpus) -> None:
    """Write a header line followed by one document per line."""
    header = {
        "format": CORPUS_FORMAT,
        "version": CORPUS_VERSION,
        "corpus_id": corpus.corpus_id,
        "count": len(corpus),
    }
    with atomic_writer(Path(path)) as f:
        f.write(dumps(header) + "\n")
        for doc in corpus:
            f.write(dumps(doc.to_dict()) + "\n")


def load_corpus(path: Path) -> Corpus:
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"Corpus file not found: {path}")

    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorpusError(f"{path}: line 1: missing header")

    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise CorpusError(f"{path}: line 1: malformed header ({e.msg})") from e
    if not isinstance(header, dict) or header.get("format") != CORPUS_FORMAT:
        raise CorpusError(f"{path}: line 1: not a corpus file")
    if header.get("version") != CORPUS_VERSION:
        raise CorpusError(f"{path}: line 1: unsupported corpus version {header.get('version')}")

    corpus = Corpus(header["corpus_id"])
    for line_number, line in enumerate(lines[1:], start=2):
        try:
            corpus.add(Document.from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise CorpusError(f"{path}: line {line_number}: malformed record ({e})") from e
        except CorpusError as e:
            raise CorpusError(f"{path}: line {line_number}: {e}") from e

    if header.get("count") is not None and header["count"] != len(corpus):
        raise CorpusError(
            f"{path}: header count {header['count']} != {len(corpus)} records"
        )
    return corpus


def corpus_token_counts(corpus: Corpus, tokenizer: Optional[Tokenizer] = None) -> dict[str, int]:
    """Total tokens per source tag."""
    tokenizer = tokenizer or get_tokenizer()
    counts: Counter[str] = Counter()
    for doc in corpus:
        counts[doc.source_tag] += tokenizer.count(doc.body)
    return dict(sorted(counts.items()))
