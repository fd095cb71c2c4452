"""Delimited text input shared by every file-based interface.

All input files are UTF-8 text with a header row naming the columns.
The delimiter is comma by default and may be declared explicitly with a
directive line before the header::

    #delimiter=tab
    pub_id	journal_title	year	doc_type	entity_ids

Only lines before the header are treated as directives; everything after
the header is data (blank lines are skipped).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

from .errors import LoadError

_DELIMITERS = {"comma": ",", "tab": "\t"}


@dataclass
class Row:
    """One data row, retaining its source line number for error messages."""

    line: int
    values: dict[str, str]

    def __getitem__(self, column: str) -> str:
        return self.values[column]


def _parse_directives(lines: list[str]) -> tuple[str, int]:
    """Return (delimiter, index of header line)."""
    delim = ","
    for i, raw in enumerate(lines):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if "=" in body:
                key, _, value = body.partition("=")
                if key.strip().lower() == "delimiter":
                    name = value.strip().lower()
                    if name not in _DELIMITERS:
                        raise LoadError(
                            f"line {i + 1}: unknown delimiter {name!r} "
                            f"(expected one of {sorted(_DELIMITERS)})"
                        )
                    delim = _DELIMITERS[name]
            continue
        return delim, i
    raise LoadError("file contains no header row")


def read_table(path: str | Path, required: Sequence[str]) -> Iterator[Row]:
    """Yield rows of a delimited file, validating the header.

    Raises LoadError when the file is missing, the header lacks one of
    the ``required`` columns, or a data row has the wrong column count.
    """
    path = Path(path)
    if not path.exists():
        raise LoadError(f"no such file: {path}")
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    delim, header_at = _parse_directives(lines)

    reader = csv.reader(io.StringIO("\n".join(lines[header_at:])), delimiter=delim)
    header = next(reader)
    columns = [c.strip() for c in header]
    missing = [c for c in required if c not in columns]
    if missing:
        raise LoadError(f"{path.name}: header is missing column(s) {missing}")

    for offset, record in enumerate(reader):
        line_no = header_at + 2 + offset
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != len(columns):
            raise LoadError(
                f"{path.name} line {line_no}: expected {len(columns)} fields, "
                f"got {len(record)}"
            )
        yield Row(line=line_no, values=dict(zip(columns, record)))


def write_table(path: str | Path, columns: Sequence[str], rows: Sequence[Sequence[str]],
                delimiter: str = ",") -> None:
    """Write rows as delimited text with a header (comma-delimited by default)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(columns)
        writer.writerows(rows)
