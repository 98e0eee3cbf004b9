"""CSV input/output for samples and GARCH parameter records."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .garch import GarchParams


def _parse_float(text: str, line: int, col: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"line {line}, column {col}: cannot parse {text.strip()!r} as a number") from None
    if not math.isfinite(v):
        raise ParseError(f"line {line}, column {col}: non-finite value {text.strip()!r}")
    return v


def parse_sample_csv(text: str) -> np.ndarray:
    """Parse comma-delimited numeric rows; a non-numeric first row is taken as a header.

    Blank lines are skipped.  Every data row must have the same number of
    fields; errors name the offending 1-based line and column.
    """
    rows = []
    width = None
    for line_no, fields in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if width is None and not rows:
            try:
                [float(f) for f in fields]
            except ValueError:
                width = len(fields)  # header
                continue
        if width is None:
            width = len(fields)
        if len(fields) != width:
            raise ParseError(f"line {line_no}: expected {width} fields, found {len(fields)}")
        rows.append([_parse_float(f, line_no, c) for c, f in enumerate(fields, start=1)])
    if not rows:
        raise ParseError("no data rows found")
    return np.array(rows, dtype=float)


def read_sample_csv(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_sample_csv(text)


def format_sample_csv(x, header=None) -> str:
    x = np.asarray(x, dtype=float)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    for row in x:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def format_params_csv(params: GarchParams) -> str:
    """Header line plus the flat record ``d,p,q,b...,B1...,Gamma1...,R lower``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(params.record_header())
    w.writerow([repr(v) if isinstance(v, float) else v for v in params.to_record()])
    return buf.getvalue()


def parse_params(text: str) -> GarchParams:
    """Read parameters from JSON or from the CSV record (header optional)."""
    s = text.strip()
    if s.startswith("{"):
        try:
            return GarchParams.from_json(s)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad parameter JSON: missing or invalid field {exc}") from None
    lines = [ln for ln in s.splitlines() if ln.strip()]
    rec = lines[-1].split(",")
    try:
        return GarchParams.from_record([float(v) for v in rec])
    except ValueError as exc:
        raise ParseError(f"line {len(lines)}: bad parameter record: {exc}") from None
