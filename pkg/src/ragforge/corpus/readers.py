"""Source file readers and the registry that routes extensions to them."""
import json
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional

from ragforge.errors import CorpusError
from .models import Document


logger = logging.getLogger(__name__)


def read_utf8(file_path: Path) -> str:
    """Read a file as strict UTF-8, naming the file and byte offset on failure."""
    try:
        raw = file_path.read_bytes()
    except OSError as e:
        raise CorpusError(f"Cannot read {file_path}: {e.strerror or e}") from e
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise CorpusError(f"Invalid UTF-8 in {file_path} at byte offset {e.start}") from e


class BaseReader(ABC):
    """Abstract base class for source readers."""

    @property
    @abstractmethod
    def supported_extensions(self) -> list[str]:
        """Return list of supported file extensions (lowercase, with dot)."""

    @abstractmethod
    def read(self, file_path: Path, relative_path: str, source_tag: str) -> list[Document]:
        """Read documents from one file."""

    def can_handle(self, file_path: Path) -> bool:
        return file_path.suffix.lower() in self.supported_extensions


class TextReader(BaseReader):
    """One document per plain text file."""

    @property
    def supported_extensions(self) -> list[str]:
        return [".txt", ".text", ".md", ".rst"]

    def read(self, file_path: Path, relative_path: str, source_tag: str) -> list[Document]:
        body = read_utf8(file_path)
        if not body.strip():
            logger.warning(f"Skipping empty file: {file_path}")
            return []
        return [
            Document(
                doc_id=f"{source_tag}/{relative_path}",
                title=file_path.stem,
                source_path=relative_path,
                body=body,
                source_tag=source_tag,
            )
        ]


class JsonlReader(BaseReader):
    """One document per JSONL record; records need ``title`` and ``body``."""

    @property
    def supported_extensions(self) -> list[str]:
        return [".jsonl"]

    def read(self, file_path: Path, relative_path: str, source_tag: str) -> list[Document]:
        text = read_utf8(file_path)
        documents = []
        index = 0
        for line_number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"{file_path}: line {line_number}: invalid JSON ({e.msg})") from e
            if not isinstance(record, dict) or "title" not in record or "body" not in record:
                raise CorpusError(f"{file_path}: line {line_number}: record needs 'title' and 'body'")

            doc_id = f"{source_tag}/{relative_path}:{index}"
            index += 1
            body = str(record["body"])
            if not body.strip():
                logger.warning(f"Skipping empty record {doc_id}")
                continue
            documents.append(
                Document(
                    doc_id=doc_id,
                    title=str(record["title"]),
                    source_path=relative_path,
                    body=body,
                    source_tag=source_tag,
                )
            )
        return documents


class ReaderRegistry:
    """Registry of source readers."""

    def __init__(self):
        self._readers: list[BaseReader] = [TextReader(), JsonlReader()]
        self._extension_map: dict[str, BaseReader] = {}
        for reader in self._readers:
            for ext in reader.supported_extensions:
                self._extension_map[ext.lower()] = reader

    def get_reader(self, file_path: Path) -> Optional[BaseReader]:
        return self._extension_map.get(file_path.suffix.lower())

    def can_read(self, file_path: Path) -> bool:
        return self.get_reader(file_path) is not None

    def supported_extensions(self) -> list[str]:
        return sorted(self._extension_map)


_registry: Optional[ReaderRegistry] = None


def get_registry() -> ReaderRegistry:
    """Get the global reader registry."""
    global _registry
    if _registry is None:
        _registry = ReaderRegistry()
    return _registry
