"""CSV loading with strict schema validation.

Every figure declares the exact header it expects; any missing or
unexpected column fails loudly, naming the offending column, rather
than producing a silently wrong plot.
"""

import csv
import os

import numpy as np


class SchemaError(ValueError):
    """An input CSV does not match its documented schema."""


def load_table(path, columns):
    """Read ``path`` and return {column: array}, enforcing the header.

    The header must contain exactly ``columns`` (order-insensitive).
    Numeric columns come back as float arrays, everything else as
    string arrays.  A missing file, an empty file, or a file with no
    data rows all raise SchemaError.
    """
    name = os.path.basename(path)
    if not os.path.exists(path):
        raise SchemaError(f"{name}: input CSV not found at {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        rows = [row for row in reader if row]
    if header is None:
        raise SchemaError(f"{name}: file is empty")
    for col in columns:
        if col not in header:
            raise SchemaError(f"{name}: missing column '{col}'")
    for col in header:
        if col not in columns:
            raise SchemaError(f"{name}: unexpected column '{col}'")
    if not rows:
        raise SchemaError(f"{name}: no data rows")
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{name}: row with {len(row)} fields, expected {len(header)}")

    table = {}
    for col in columns:
        raw = [row[header.index(col)] for row in rows]
        try:
            table[col] = np.array([float(v) for v in raw])
        except ValueError:
            table[col] = np.array(raw)
    return table


def grid_from_columns(x, y, z):
    """Reshape long-form (x, y, z) samples onto their rectangular grid."""
    xs = np.unique(x)
    ys = np.unique(y)
    if xs.size * ys.size != len(z):
        raise SchemaError(
            f"map data is not a full grid: {xs.size} x {ys.size} != {len(z)} rows"
        )
    Z = np.empty((ys.size, xs.size))
    Z[np.searchsorted(ys, y), np.searchsorted(xs, x)] = z
    return xs, ys, Z
