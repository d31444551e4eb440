"""Small helpers for the flat CSV / gnuplot files written by this package."""
from __future__ import annotations

import csv
import io
import os
from typing import IO, Iterable, Sequence


def fmt(value) -> str:
    """Format a cell; floats keep 17 significant digits so round-trips are exact."""
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_rows(
    dest: str | os.PathLike | IO[str],
    header: Sequence[str],
    rows: Iterable[Sequence],
) -> None:
    if hasattr(dest, "write"):
        _write(dest, header, rows)
        return
    with open(dest, "w", newline="") as fh:
        _write(fh, header, rows)


def _write(fh: IO[str], header: Sequence[str], rows: Iterable[Sequence]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def read_rows(src: str | os.PathLike | IO[str]) -> tuple[list[str], list[list[str]]]:
    if hasattr(src, "read"):
        reader = csv.reader(src)
        rows = list(reader)
    else:
        with open(src, newline="") as fh:
            rows = list(csv.reader(fh))
    if not rows:
        raise ValueError("CSV input is empty; a header line is required")
    return [h.strip() for h in rows[0]], rows[1:]


def to_string(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    _write(buf, header, rows)
    return buf.getvalue()


def write_plot_data(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Whitespace-separated columns with a ``#`` comment header (gnuplot style)."""
    with open(path, "w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in rows:
            fh.write(" ".join(fmt(v) if v is not None else "nan" for v in row) + "\n")
