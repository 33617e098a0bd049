"""Corpus data models."""
from dataclasses import asdict, dataclass, field
from typing import Any, Iterator, Optional

from ragforge.errors import CorpusError


@dataclass(frozen=True)
class Document:
    """A source text with its provenance."""
    doc_id: str          # source_tag + "/" + relative path (+ ":" + line index)
    title: str
    source_path: str
    body: str
    source_tag: str

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Document":
        return cls(
            doc_id=data["doc_id"],
            title=data["title"],
            source_path=data["source_path"],
            body=data["body"],
            source_tag=data["source_tag"],
        )


@dataclass
class Corpus:
    """Ordered, duplicate-free document collection. Iterates in insertion order."""
    corpus_id: str
    documents: list[Document] = field(default_factory=list)

    def __post_init__(self):
        self._ids: dict[str, int] = {}
        for doc in self.documents:
            self._register(doc)

    def _register(self, doc: Document) -> None:
        if doc.doc_id in self._ids:
            raise CorpusError(f"Duplicate doc_id: {doc.doc_id}")
        self._ids[doc.doc_id] = len(self._ids)

    def add(self, doc: Document) -> None:
        self._register(doc)
        self.documents.append(doc)

    def merge(self, other: "Corpus") -> "Corpus":
        """New corpus with this corpus' documents followed by ``other``'s."""
        return Corpus(self.corpus_id, [*self.documents, *other.documents])

    def get(self, doc_id: str) -> Optional[Document]:
        pos = self._ids.get(doc_id)
        return None if pos is None else self.documents[pos]

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self.corpus_id == other.corpus_id and self.documents == other.documents
