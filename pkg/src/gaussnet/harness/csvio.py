"""CSV writing with round-trip float formatting, and plot-data extraction."""

import csv
import logging
from pathlib import Path

from ..errors import ParameterError

log = logging.getLogger(__name__)


def format_value(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    """Write ``rows`` (dicts) under a fixed ``header``; returns the path."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(row.get(col, "")) for col in header])
    return path


def read_csv(path):
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return [], []
        return header, list(reader)


def emit_plotdata(csv_path, x_field, y_field, group_field=None, out_path=None):
    """Write a tidy ``x, y, group`` table taken from ``csv_path``.

    Rows keep their order and duplicates are preserved. Returns
    ``(out_path, row_count)``; an empty input body yields a header-only file
    and a logged warning.
    """
    header, rows = read_csv(csv_path)
    wanted = [f for f in (x_field, y_field, group_field) if f is not None]
    missing = [f for f in wanted if f not in header]
    if missing:
        raise ParameterError(f"unknown field(s) {', '.join(missing)}; available: {', '.join(header)}")
    ix, iy = header.index(x_field), header.index(y_field)
    ig = header.index(group_field) if group_field is not None else None
    out_path = Path(out_path) if out_path is not None else Path(csv_path).with_suffix(".plot.csv")
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "group"])
        for row in rows:
            writer.writerow([row[ix], row[iy], row[ig] if ig is not None else ""])
    if not rows:
        log.warning("%s has no data rows; wrote header only", csv_path)
    return out_path, len(rows)
