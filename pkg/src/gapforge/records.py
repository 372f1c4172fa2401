"""CSV / JSONL record files with fixed column schemas.

Floats are written with 17 significant digits, so reading a file back
reproduces the written values bit for bit.  Rationals are written as
``num/den`` (or a bare integer).
"""

from __future__ import annotations

import csv
import io
import json
import sys
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

from .numeric import format_decimal, format_rational

SCHEMAS = {
    "primes": (("n", "int"), ("p_n", "int")),
    "gaps": (("n", "int"), ("p_n", "int"), ("p_next", "int"), ("g", "int")),
    "xi": (
        ("n", "int"),
        ("p_n", "int"),
        ("p_next", "int"),
        ("g", "int"),
        ("Q", "float"),
        ("verdict", "str"),
        ("ratio_verdict", "str"),
        ("exact", "bool"),
        ("margin", "float"),
    ),
    "bounds": (("n", "int"), ("g", "int"), ("rhs", "float"), ("verdict", "str")),
    "liminf": (("n", "int"), ("metric", "str"), ("value", "float"), ("running_min", "float"), ("argmin", "int")),
    "recurrence": (("n", "int"), ("q_n", "number"), ("Q_n", "number"), ("status", "str")),
    "twin": (("n", "int"), ("p_n", "int"), ("p_next", "int"), ("g", "int"), ("Q", "float")),
    "compare": (("n", "int"), ("sharp_rhs", "float"), ("kourbatov_rhs", "float"), ("sharp_smaller", "bool")),
    "classical": (("n", "int"), ("p_n", "int"), ("pnt_ratio", "float"), ("root", "float")),
    "density": (("block_start", "int"), ("block_end", "int"), ("holds", "int"), ("fails", "int"), ("indet", "int")),
    "kummer_scan": (("n", "int"), ("quantity", "number"), ("c", "number"), ("verdict", "str")),
    "witness": (("trial", "int"), ("n_prime", "int"), ("lhs", "number"), ("rhs", "number"), ("exact", "bool")),
    "table": (("n", "int"), ("q_n", "str")),
}


def format_field(kind: str, v) -> str:
    if v is None:
        return ""
    if kind == "int":
        return str(int(v))
    if kind == "float":
        return format_decimal(v)
    if kind == "bool":
        return "true" if v else "false"
    if kind == "number":
        if isinstance(v, Fraction):
            return format_rational(v)
        if isinstance(v, int):
            return str(v)
        return format_decimal(v)
    return str(v)


def parse_field(kind: str, text: str):
    if text == "":
        return None
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "bool":
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean {text!r}")
        return text == "true"
    if kind == "number":
        if any(c in text for c in ".eEna"):
            return float(text)
        return Fraction(text)
    return text


def _json_field(kind: str, v):
    if v is None:
        return None
    if kind == "int":
        return int(v)
    if kind == "bool":
        return bool(v)
    if kind in ("float", "number"):
        if isinstance(v, Fraction) or kind == "number" and isinstance(v, int):
            return format_field("number", v)
        f = float(v)
        return f if f == f and abs(f) != float("inf") else format_decimal(f)
    return str(v)


def _from_json(kind: str, v):
    if v is None:
        return None
    if kind in ("float", "number") and isinstance(v, str):
        return parse_field(kind, v)
    if kind == "float":
        return float(v)
    if kind == "number" and isinstance(v, (int, float)):
        return float(v)
    return v


class RecordWriter:
    def __init__(self, fh, schema: str, fmt: str = "csv"):
        if fmt not in ("csv", "jsonl"):
            raise ValueError(f"unknown format {fmt!r}")
        self.fields = SCHEMAS[schema]
        self.names = [f for f, _ in self.fields]
        self.fmt = fmt
        self.fh = fh
        self.count = 0
        if fmt == "csv":
            self.csv = csv.writer(fh, lineterminator="\n")
            self.csv.writerow(self.names)

    def write(self, row):
        self.count += 1
        if self.fmt == "csv":
            self.csv.writerow([format_field(k, v) for (_, k), v in zip(self.fields, row)])
        else:
            obj = {name: _json_field(k, v) for (name, k), v in zip(self.fields, row)}
            self.fh.write(json.dumps(obj, separators=(",", ":")) + "\n")

    def write_many(self, rows):
        for row in rows:
            self.write(row)


@contextmanager
def open_writer(path, schema: str, fmt: str = "csv"):
    """Writer for ``path``; ``"-"`` means standard output, ``None`` discards."""
    if path is None:
        yield RecordWriter(io.StringIO(), schema, fmt)
    elif str(path) == "-":
        yield RecordWriter(sys.stdout, schema, fmt)
        sys.stdout.flush()
    else:
        with Path(path).open("w", newline="") as fh:
            yield RecordWriter(fh, schema, fmt)


def read_records(path, schema: str, fmt: str | None = None) -> list[tuple]:
    """Read a file written by :class:`RecordWriter` back into tuples."""
    fields = SCHEMAS[schema]
    path = Path(path)
    if fmt is None:
        fmt = "jsonl" if path.suffix == ".jsonl" else "csv"
    rows = []
    with path.open(newline="") as fh:
        if fmt == "csv":
            reader = csv.reader(fh)
            header = next(reader)
            if header != [f for f, _ in fields]:
                raise ValueError(f"unexpected header {header}")
            for r in reader:
                rows.append(tuple(parse_field(k, t) for (_, k), t in zip(fields, r)))
        else:
            for line in fh:
                obj = json.loads(line)
                rows.append(tuple(_from_json(k, obj[name]) for name, k in fields))
    return rows
