"""CSV tables with lossless float round trip.

Floats are written with ``repr`` (shortest string that parses back to the
same double), integers as integers, LF line endings, no trailing comma.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import IoError

DENSITY_COLUMNS = ("s", "p_theory", "p_hat", "std_err", "count")
DISTRIBUTION_COLUMNS = ("s", "P_theory", "P_hat", "std_err")
CORRELATION_COLUMNS = ("tau", "r", "k2_theory", "k2_hat", "std_err", "pairs")
ZEROS_COLUMNS = ("trial", "re", "im", "residual")

_INT = re.compile(r"[+-]?\d+\Z")


@dataclass
class Table:
    columns: tuple
    rows: list = field(default_factory=list)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column names")
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError("table is not rectangular")

    @classmethod
    def from_columns(cls, data: dict, columns=None) -> "Table":
        columns = tuple(data) if columns is None else tuple(columns)
        cols = [np.asarray(data[c]).ravel() for c in columns]
        n = {c.size for c in cols}
        if len(n) > 1:
            raise ValueError("columns differ in length")
        rows = [tuple(_scalar(c[i]) for c in cols) for i in range(cols[0].size if cols else 0)]
        return cls(columns, rows)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def __len__(self):
        return len(self.rows)


def _scalar(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
        return int(v)
    return float(v)


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def parse_value(text: str):
    """Integer, float, or (for labels) the text itself."""
    if _INT.match(text):
        return int(text)
    try:
        return float(text)
    except ValueError:
        return text


def dumps(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for r in table.rows:
        w.writerow([format_value(v) for v in r])
    return buf.getvalue()


def loads(text: str) -> Table:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise IoError("empty CSV: no header row") from None
    rows = [tuple(parse_value(f) for f in row) for row in reader if row]
    return Table(header, rows)


def write_csv(table: Table, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(dumps(table))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> Table:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return loads(text)
