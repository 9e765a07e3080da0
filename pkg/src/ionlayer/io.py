"""Text serialization shared by the solvers and the command line.

Floats are written with 17 significant digits so that a dump read back with
``float()`` reproduces the computed value bit for bit.  CSV files use a
header row, ``,`` separators, ``.`` decimals and LF line endings.
"""

import csv
import io
import json
import math

import numpy as np


def fmt(x):
    """Format a scalar for text output (17 significant digits for floats)."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        if x == 0.0:
            return "0"  # drop the sign of negative zero
        return f"{x:.17g}"
    if x is None:
        return ""
    return str(x)


def csv_text(header, rows):
    """Render rows (iterables matching ``header``) as CSV text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def columns_csv_text(columns):
    """Render a mapping of equal-length columns as CSV text."""
    names = list(columns)
    arrays = [np.asarray(columns[n]) for n in names]
    return csv_text(names, zip(*arrays))


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            # JSON has no infinities; keep them readable as strings
            return fmt(x)
        return float(fmt(x))
    return x


def json_text(obj):
    """Deterministic JSON (sorted keys, 17-digit floats, trailing newline)."""
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_text(path, text):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
