"""Table output: CSV with ``#``-prefixed JSON metadata lines, or plain JSON."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable, Sequence, TextIO

FORMAT_VERSION = 1


def _jsonable(obj: Any):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, **kw) -> str:
    return json.dumps(obj, default=_jsonable, **kw)


def write_csv(fh: TextIO, columns: Sequence[str], rows: Iterable[Sequence], metadata: dict | None = None) -> None:
    meta = {"format_version": FORMAT_VERSION, **(metadata or {})}
    for line in dumps(meta, indent=1, sort_keys=True).splitlines():
        fh.write(f"# {line}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([f"{x:.17g}" if isinstance(x, float) else x for x in row])


def csv_string(columns, rows, metadata=None) -> str:
    buf = io.StringIO()
    write_csv(buf, columns, rows, metadata)
    return buf.getvalue()


def read_csv(text: str) -> tuple[dict, list[dict]]:
    """Inverse of :func:`write_csv`: returns (metadata, rows as dicts of strings)."""
    meta_lines, body = [], []
    for line in text.splitlines():
        if line.startswith("#"):
            meta_lines.append(line[2:] if line.startswith("# ") else line[1:])
        else:
            body.append(line)
    meta = json.loads("\n".join(meta_lines)) if meta_lines else {}
    return meta, list(csv.DictReader(body))


def csv_body(text: str) -> str:
    return "\n".join(line for line in text.splitlines() if not line.startswith("#"))
