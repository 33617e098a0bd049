"""JSONL and JSON artifact helpers."""
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Iterator


def dumps(record: Any) -> str:
    """Serialize one record as a single UTF-8 JSON line (no trailing newline)."""
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def read_jsonl(path: Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield ``(line_number, record)`` pairs; line numbers start at 1.

    Blank lines are skipped. Raises ``ValueError`` naming the line on bad JSON.
    """
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                yield line_number, json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}: line {line_number}: {e.msg}") from e


def write_jsonl(path: Path, records: Iterable[Any]) -> int:
    """Atomically write records, one JSON document per line. Returns the count."""
    count = 0
    with atomic_writer(path) as f:
        for record in records:
            f.write(dumps(record) + "\n")
            count += 1
    return count


def append_jsonl(path: Path, records: Iterable[Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(dumps(record) + "\n")
        f.flush()


def write_json(path: Path, data: Any) -> None:
    with atomic_writer(path) as f:
        json.dump(data, f, ensure_ascii=False, indent=2, sort_keys=False)
        f.write("\n")


def read_json(path: Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))


class atomic_writer:
    """Write to a temp file next to ``path`` and rename it into place on success."""

    def __init__(self, path: Path, mode: str = "w"):
        self.path = Path(path)
        self.mode = mode
        self._tmp_name = None
        self._file = None

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        fd, self._tmp_name = tempfile.mkstemp(prefix=f".{self.path.name}.", dir=self.path.parent)
        if "b" in self.mode:
            self._file = os.fdopen(fd, self.mode)
        else:
            self._file = os.fdopen(fd, self.mode, encoding="utf-8", newline="\n")
        return self._file

    def __exit__(self, exc_type, exc, tb):
        self._file.close()
        if exc_type is None:
            os.replace(self._tmp_name, self.path)
        else:
            os.unlink(self._tmp_name)
        return False
