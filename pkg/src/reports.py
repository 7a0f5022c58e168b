"""CSV and JSON rendering with fixed-precision numbers."""

import csv
import io
import json
import math
from typing import Iterable, Sequence

SIGNIFICANT_DIGITS = 12


def format_number(value, digits: int = SIGNIFICANT_DIGITS) -> str:
    """Locale-independent ``digits``-significant-digit text; tiny values print as 0."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if not math.isfinite(value):
        return str(value)
    if abs(value) < 10.0 ** -digits:
        return "0"
    return f"{value:.{digits}g}"


def _rounded(value, digits: int):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return float(format_number(value, digits))
    if isinstance(value, dict):
        return {k: _rounded(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(v, digits) for v in value]
    # numpy scalars
    if hasattr(value, 'item'):
        return _rounded(value.item(), digits)
    return value


def render_json(data: dict, digits: int = SIGNIFICANT_DIGITS) -> str:
    """JSON text with every float rounded to ``digits`` significant digits.

    Key order is the insertion order of ``data``.
    """
    return json.dumps(_rounded(data, digits), indent=2) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence], digits: int = SIGNIFICANT_DIGITS) -> str:
    """CSV text with a mandatory header row; empty cells stay empty."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if cell is None else format_number(cell, digits) if not isinstance(cell, str) else cell
                         for cell in row])
    return buffer.getvalue()


def write_output(text: str, path: str = None):
    """Write to ``path`` or stdout."""
    if path:
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
    else:
        print(text, end='')
