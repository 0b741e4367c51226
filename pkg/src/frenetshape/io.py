"""Curve and result files.

Curves are CSV files with header ``t,x1,...,xd``; numbers are written with
17 significant digits so a write/read round trip is bit exact. Results are
JSON envelopes echoing every parameter of the run. All writes go to a
temporary file in the target directory which is then renamed over the
destination.
"""

import csv
import io
import json
import os
import sys
import tempfile
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from .geom_core import DiscreteCurve

__all__ = [
    "atomic_write",
    "write_curve",
    "read_curve",
    "write_table",
    "read_table",
    "write_matrix",
    "read_matrix",
    "write_json",
    "envelope",
    "package_version",
]


def package_version():
    try:
        return version("frenetshape")
    except PackageNotFoundError:
        return "unknown"


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and an atomic rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x):
    return format(float(x), ".17g")


def write_table(path, header, columns):
    """Write equally long columns as CSV with the given header."""
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in zip(*cols):
        writer.writerow([_fmt(v) for v in row])
    atomic_write(path, buf.getvalue())


def read_table(path):
    """Read a numeric CSV with a header row; returns ``(header, array)``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if data.size and data.shape[1] != len(header):
        raise ValueError(f"{path}: rows do not match the header")
    return header, data.reshape(len(body), len(header))


def write_curve(path, curve):
    d = curve.dim
    header = ["t"] + [f"x{k + 1}" for k in range(d)]
    write_table(path, header, [curve.grid] + [curve.points[:, k] for k in range(d)])


def read_curve(path):
    """Read a curve file.

    The ``t`` column must be strictly increasing; it is rescaled affinely to
    [0, 1] when it covers another interval.
    """
    header, data = read_table(path)
    if len(header) < 3 or header[0] != "t" or header[1:] != [f"x{k + 1}" for k in range(len(header) - 1)]:
        raise ValueError(f"{path}: expected header t,x1,...,xd with d >= 2")
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need at least two samples")
    t = data[:, 0]
    if np.any(np.diff(t) <= 0):
        raise ValueError(f"{path}: t column is not strictly increasing")
    if t[0] != 0.0 or t[-1] != 1.0:
        t = (t - t[0]) / (t[-1] - t[0])
        t[-1] = 1.0
    return DiscreteCurve(t, data[:, 1:])


def write_matrix(path, labels, values):
    """Square matrix as CSV: header ``label,<labels>``, one labelled row per curve."""
    values = np.asarray(values, dtype=float)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["label"] + list(labels))
    for lab, row in zip(labels, values):
        writer.writerow([lab] + [_fmt(v) for v in row])
    atomic_write(path, buf.getvalue())


def read_matrix(path):
    """Inverse of :func:`write_matrix`; returns ``(labels, values)``."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    labels = rows[0][1:]
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float)
    return labels, values


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj):
    atomic_write(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def envelope(command, parameters, result=None, meta=None, argv=None):
    """Result envelope: command, echoed parameters, results and run metadata."""
    argv = sys.argv[1:] if argv is None else list(argv)
    info = {"library_version": package_version(), "argv": argv, "python": sys.version.split()[0]}
    info.update(meta or {})
    return {"command": command, "parameters": parameters, "result": result or {}, "metadata": info}
