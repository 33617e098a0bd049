"""
Index file format.

    <header JSON>\n
    <count * dimension little-endian float32>
    <JSON list of chunk ids>\n

The header carries format, version, dimension, count and the strategy pair.
"""
import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from ragforge.chunking.models import ChunkingStrategy
from ragforge.embedding.fusion import EmbeddingStrategy
from ragforge.errors import IndexFormatError
from ragforge.jsonl import atomic_writer, dumps
from .vector_index import VectorIndex


logger = logging.getLogger(__name__)

INDEX_FORMAT = "ragforge-index"
INDEX_VERSION = 1
_ROW_DTYPE = np.dtype("<f4")


def save_index(path: Path, index: VectorIndex) -> None:
    header = {
        "format": INDEX_FORMAT,
        "version": INDEX_VERSION,
        "dimension": index.dimension,
        "count": len(index),
        "chunking_strategy": index.chunking_strategy.value if index.chunking_strategy else None,
        "embedding_strategy": index.embedding_strategy.value if index.embedding_strategy else None,
    }
    with atomic_writer(path, mode="wb") as f:
        f.write((dumps(header) + "\n").encode("utf-8"))
        f.write(index.matrix.astype(_ROW_DTYPE, copy=False).tobytes(order="C"))
        f.write((dumps(index.ids) + "\n").encode("utf-8"))
    logger.debug(f"Saved index {index.cell} to {path}")


def load_index(path: Path) -> VectorIndex:
    path = Path(path)
    data = path.read_bytes()

    newline = data.find(b"\n")
    if newline < 0:
        raise IndexFormatError(f"{path}: truncated header at byte offset {len(data)}")
    try:
        header = json.loads(data[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise IndexFormatError(f"{path}: unreadable header at byte offset 0: {e}") from e

    if header.get("format") != INDEX_FORMAT:
        raise IndexFormatError(f"{path}: not a ragforge index (format {header.get('format')!r})")
    if header.get("version") != INDEX_VERSION:
        raise IndexFormatError(
            f"{path}: unsupported index version {header.get('version')!r}, expected {INDEX_VERSION}"
        )

    dimension, count = int(header["dimension"]), int(header["count"])
    rows_start = newline + 1
    rows_end = rows_start + count * dimension * _ROW_DTYPE.itemsize
    if len(data) < rows_end:
        raise IndexFormatError(
            f"{path}: truncated vector data at byte offset {len(data)}, expected {rows_end} bytes"
        )
    matrix = np.frombuffer(data, dtype=_ROW_DTYPE, count=count * dimension, offset=rows_start)
    matrix = matrix.reshape(count, dimension)

    try:
        ids = json.loads(data[rows_end:].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise IndexFormatError(
            f"{path}: truncated or corrupt id table at byte offset {rows_end}: {e}"
        ) from e
    if not isinstance(ids, list) or len(ids) != count:
        raise IndexFormatError(f"{path}: id table at byte offset {rows_end} does not hold {count} ids")

    return VectorIndex(
        ids=[str(chunk_id) for chunk_id in ids],
        matrix=matrix,
        chunking_strategy=_enum(ChunkingStrategy, header.get("chunking_strategy")),
        embedding_strategy=_enum(EmbeddingStrategy, header.get("embedding_strategy")),
    )


def _enum(cls, value: Optional[str]):
    return cls(value) if value else None
