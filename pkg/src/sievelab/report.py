"""Report rows and their byte-stable CSV / JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Union

FIELDS = ("suite", "instance", "lhs", "rhs", "ratio", "pass", "witness")

Number = Union[int, float, None]


@dataclass(frozen=True)
class ReportRow:
    suite: str
    instance: str
    lhs: Number
    rhs: Number
    ratio: Number
    passed: bool
    witness: Optional[dict] = None

    def sort_key(self) -> tuple[str, str]:
        return (self.suite, self.instance)


def format_number(x: Number) -> str:
    """Integers verbatim, floats to 12 significant digits, None as empty."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _json_number(x: Number) -> Any:
    if x is None or isinstance(x, int):
        return x
    text = format_number(x)
    return text if text in ("nan", "inf", "-inf") else float(text)


def _witness_text(w: Optional[dict]) -> str:
    return "" if w is None else json.dumps(w, sort_keys=True, separators=(",", ":"), default=str)


def render(rows: Iterable[ReportRow], fmt: str = "csv") -> str:
    rows = list(rows)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(FIELDS)
        for r in rows:
            writer.writerow([r.suite, r.instance, format_number(r.lhs), format_number(r.rhs),
                             format_number(r.ratio), "true" if r.passed else "false", _witness_text(r.witness)])
        return buf.getvalue()
    if fmt == "json":
        objs = [
            {"suite": r.suite, "instance": r.instance, "lhs": _json_number(r.lhs), "rhs": _json_number(r.rhs),
             "ratio": _json_number(r.ratio), "pass": r.passed, "witness": r.witness}
            for r in rows
        ]
        return json.dumps(objs, indent=2, sort_keys=False, default=str) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit(rows: Iterable[ReportRow], path: Union[str, Path, None], fmt: str = "csv") -> str:
    """Write the rendered report to ``path`` (or return it only, when path is None)."""
    text = render(rows, fmt)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _parse_number(text: str) -> Number:
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse(text: str, fmt: str = "csv") -> list[ReportRow]:
    if fmt == "csv":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != FIELDS:
            raise ValueError(f"unexpected header {header}")
        return [
            ReportRow(s, inst, _parse_number(l), _parse_number(r), _parse_number(q), ok == "true",
                      json.loads(w) if w else None)
            for s, inst, l, r, q, ok, w in reader
        ]
    if fmt == "json":
        def num(v):
            return float(v) if isinstance(v, str) else v
        return [ReportRow(o["suite"], o["instance"], num(o["lhs"]), num(o["rhs"]), num(o["ratio"]), o["pass"],
                          o["witness"]) for o in json.loads(text)]
    raise ValueError(f"unknown format {fmt!r}")


def read_report(path: Union[str, Path], fmt: str = "csv") -> list[ReportRow]:
    return parse(Path(path).read_text(encoding="utf-8"), fmt)
