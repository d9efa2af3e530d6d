"""Plain CSV with a ``#``-commented header block, and a reader for it."""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

UNITS_NOTE = "units: thresholds and gains in dB, distances in m, powers in W, EE in bit/s/Hz/W"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(stream, columns: Sequence[str], rows: Iterable[Sequence], header: Sequence[str] = ()):
    """Write ``# line`` comments, then a header row and the data rows."""
    for line in header:
        stream.write(f"# {line}\n")
    stream.write(f"# {UNITS_NOTE}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _convert(text: str):
    if text == "":
        return None
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    if text in ("True", "False"):
        return text == "True"
    return text


def read_csv(source) -> tuple[dict[str, str], list[dict[str, object]]]:
    """Parse a file written by :func:`write_csv`.

    Returns the ``key=value`` header comments and the rows as dicts with
    numbers converted.
    """
    if isinstance(source, (str, Path)) and Path(source).exists():
        text = Path(source).read_text()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    meta: dict[str, str] = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            item = line[1:].strip()
            if "=" in item:
                key, value = item.split("=", 1)
                meta[key.strip()] = value.strip()
        elif line.strip():
            body.append(line)
    reader = csv.DictReader(io.StringIO("\n".join(body)))
    rows = [{k: _convert(v) for k, v in row.items()} for row in reader]
    return meta, rows
