"""Content-hash stamps that make stages idempotent."""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Iterable, Optional

from ragforge.jsonl import read_json, write_json


logger = logging.getLogger(__name__)


def hash_file(file_path: Path, algorithm: str = "sha256", chunk_size: int = 65536) -> str:
    """Hex digest of file contents."""
    hasher = hashlib.new(algorithm)
    with open(file_path, "rb") as f:
        while chunk := f.read(chunk_size):
            hasher.update(chunk)
    return hasher.hexdigest()


def stage_digest(
    stage: str,
    inputs: Iterable[Path],
    settings: dict[str, Any],
    root: Optional[Path] = None,
) -> str:
    """
    Digest of a stage's input files (by content) and its settings.

    Args:
        stage: Stage name, part of the digest.
        inputs: Files the stage reads; order does not matter.
        settings: Config values the stage depends on.
        root: Paths under it are keyed relative to it, so a moved
            workspace keeps its digests.

    Returns:
        Hex SHA-256 digest.
    """
    files = {}
    for path in sorted(Path(p) for p in inputs):
        key = path.relative_to(root).as_posix() if root and path.is_relative_to(root) else path.as_posix()
        files[key] = hash_file(path)
    payload = json.dumps(
        {"stage": stage, "inputs": files, "settings": settings}, sort_keys=True, default=str
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def is_current(stamp_path: Path, digest: str, outputs: Iterable[Path]) -> bool:
    """True when the stamp matches and every output still exists."""
    if not stamp_path.exists():
        return False
    try:
        stored = read_json(stamp_path)
    except ValueError:
        logger.debug(f"Unreadable stamp {stamp_path}")
        return False
    return stored.get("digest") == digest and all(Path(p).exists() for p in outputs)


def write_stamp(stamp_path: Path, stage: str, digest: str) -> None:
    write_json(stamp_path, {"stage": stage, "digest": digest})
