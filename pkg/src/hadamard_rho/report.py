"""Number encoding shared by the CSV and JSON emitters.

Integers stay integers, non-integral rationals become ``"p/q"`` strings and
floats stay floats, so ``decode(encode(x)) == x`` for every value the package
produces.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

from .errors import FormatError
from .norms import normalize


def encode_number(v):
    v = normalize(v)
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def decode_number(v):
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        s = v.strip()
        try:
            if "/" in s:
                return normalize(Fraction(s))
            if any(c in s.lower() for c in ".einf"):
                return float(s)
            return int(s)
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"not a number: {v!r}") from None
    raise FormatError(f"not a number: {v!r}")


def exact_string(v) -> str:
    """Exact values as ``"p/q"`` (or ``"p"``) strings, floats via ``repr``."""
    v = normalize(v)
    if isinstance(v, (int, Fraction)):
        return str(v)
    return repr(float(v))


def csv_cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    v = normalize(v)
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def write_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([csv_cell(c) if not isinstance(c, str) else c for c in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise FormatError("empty CSV")
    return rows[0], rows[1:]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"
