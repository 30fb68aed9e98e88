import json
from pathlib import Path
from typing import Iterable, Iterator

from mlgc.errors import InputError, ParseError


def extract_json(text: str, line: int | None = None) -> dict:
    """
    Parse one JSON object from a single line of a JSON Lines file.
    Anything other than an object is a parse error naming the line.
    """
    try:
        value = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON ({e.msg} at column {e.colno})", line=line)

    if not isinstance(value, dict):
        raise ParseError(f"expected a JSON object, got {type(value).__name__}", line=line)
    return value


def iter_jsonl(path) -> Iterator[tuple[int, dict]]:
    """Yield (line number, object) for every non-blank line."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"file not found: {path}")

    # decoded per line so a bad byte is reported with its line number
    with path.open("rb") as f:
        for line_no, raw in enumerate(f, start=1):
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise ParseError(f"invalid UTF-8 at byte {e.start}", line=line_no)
            if not text.strip():
                continue
            yield line_no, extract_json(text, line=line_no)


def dumps(obj) -> str:
    # repr-based float formatting is shortest round-trip, so output is bit-stable
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def write_jsonl(path, records: Iterable[dict]) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(dumps(record))
            f.write("\n")


def read_json(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"file not found: {path}")
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{path.name}: invalid UTF-8 at byte {e.start}")
    return extract_json(text)


def write_json(path, obj) -> None:
    Path(path).write_text(
        json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n",
        encoding="utf-8",
    )
