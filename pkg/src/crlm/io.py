"""Plain-text file formats: CSV matrices, label lists and JSON sidecars."""
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


class ParseError(ValueError):
    """Malformed input file; the message names the offending line."""


def write_matrix_csv(path, X):
    """One row per observation, comma separated, no header, '%.17g' floats."""
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", newline="\n") as fh:
        for row in X:
            fh.write(",".join("%.17g" % v for v in row))
            fh.write("\n")


def read_matrix_csv(path):
    """Read a matrix written by :func:`write_matrix_csv`.

    Blank lines are skipped. Raises :class:`ParseError` with the 1-based
    line number on a bad field, a non-finite value or a ragged row.
    """
    rows, width = [], None
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                vals = [float(f) for f in line.split(",")]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError(f"{path}: line {lineno}: non-finite value")
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(f"{path}: line {lineno}: expected {width} fields, got {len(vals)}")
            rows.append(vals)
    if not rows:
        return np.zeros((0, 0))
    return np.array(rows, dtype=np.float64)


def write_labels(path, labels):
    with open(path, "w", newline="\n") as fh:
        for v in np.asarray(labels, dtype=np.int64):
            fh.write(f"{int(v)}\n")


def read_labels(path):
    out = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(int(line))
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: not an integer: {line!r}") from None
    return np.array(out, dtype=np.int64)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj):
    """Write ``obj`` with a ``schema_version`` field; inf/nan become strings/null."""
    payload = {"schema_version": SCHEMA_VERSION}
    payload.update(to_jsonable(obj))
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_rows_csv(path, header, rows):
    """Header line followed by one comma-separated line per row."""
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in r) + "\n")


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def sibling_paths(out):
    """Data, labels and sidecar paths derived from an output path or stem."""
    p = Path(out)
    stem = p.with_suffix("") if p.suffix == ".csv" else p
    return (stem.with_name(stem.name + ".csv"),
            stem.with_name(stem.name + ".labels"),
            stem.with_name(stem.name + ".json"))
