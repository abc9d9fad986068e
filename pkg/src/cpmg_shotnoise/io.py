"""CSV and JSON readers/writers for rate curves, coherence traces and reports.

Every CSV starts with a ``# schema_version=N`` comment line followed by a
header row; JSON documents carry a top-level ``schema_version`` key.
Files are written atomically (temporary file, then rename).
"""
from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import CoherenceTrace, RateCurve, Route

SCHEMA_VERSION = 1

RATE_COLUMNS = ("f_s_hz", "gamma_per_s")
DATASET_COLUMNS = ("f_s_hz", "gamma2_per_s", "sigma_per_s")
TRACE_COLUMNS = ("t_cpmg_s", "coherence", "std_err")
CALIBRATION_COLUMNS = ("power", "gamma_per_s")


class DataFormatError(ValueError):
    """Missing, empty or malformed input file."""


def _fmt(x: float) -> str:
    return repr(float(x))


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(columns: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buf = _io.StringIO()
    buf.write(f"# schema_version={SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _read_csv(path, columns: Sequence[str], optional: Sequence[str] = ()) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise DataFormatError(f"{path} is empty")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    missing = [c for c in columns if c not in header and c not in optional]
    if missing:
        raise DataFormatError(f"{path}: missing column(s) {', '.join(missing)}; header is {header}")
    idx = {c: header.index(c) for c in columns if c in header}
    out = {c: [] for c in idx}
    for lineno, row in enumerate(reader, start=2):
        try:
            for c, i in idx.items():
                out[c].append(float(row[i]))
        except (ValueError, IndexError) as exc:
            raise DataFormatError(f"{path}: bad value on data row {lineno - 1}: {row}") from exc
    if not out[columns[0]]:
        raise DataFormatError(f"{path} has a header but no data rows")
    return {c: np.asarray(v) for c, v in out.items()}


# --------------------------------------------------------------------------
# rate curves
# --------------------------------------------------------------------------

def write_rate_csv(path, f_s, gamma) -> None:
    """Formula output: ``f_s_hz,gamma_per_s``."""
    atomic_write_text(path, _csv_text(RATE_COLUMNS, zip(np.atleast_1d(f_s), np.atleast_1d(gamma))))


def read_rate_csv(path) -> tuple[np.ndarray, np.ndarray]:
    d = _read_csv(path, RATE_COLUMNS)
    return d["f_s_hz"], d["gamma_per_s"]


def write_dataset_csv(path, curve: RateCurve) -> None:
    """Measured or simulated rates: ``f_s_hz,gamma2_per_s,sigma_per_s``."""
    rows = zip(curve.f_s, curve.gamma2, curve.sigma_gamma2)
    atomic_write_text(path, _csv_text(DATASET_COLUMNS, rows))


def read_dataset(path, label: str | None = None) -> RateCurve:
    """Read a dataset from CSV or from a JSON array of [f_s, gamma2, sigma] triples.

    ``sigma_per_s`` is optional; missing or all-zero sigma means unweighted.
    """
    path = Path(path)
    label = path.stem if label is None else label
    if path.suffix.lower() == ".json":
        doc = read_json(path)
        rows = doc.get("data") if isinstance(doc, dict) else doc
        if not isinstance(rows, list) or not rows:
            raise DataFormatError(f"{path}: expected a non-empty array of triples")
        try:
            arr = np.asarray(rows, dtype=float)
        except (TypeError, ValueError) as exc:
            raise DataFormatError(f"{path}: non-numeric entries") from exc
        if arr.ndim != 2 or arr.shape[1] not in (2, 3):
            raise DataFormatError(f"{path}: rows must be [f_s_hz, gamma2_per_s(, sigma_per_s)]")
        f, g = arr[:, 0], arr[:, 1]
        s = arr[:, 2] if arr.shape[1] == 3 else None
    else:
        d = _read_csv(path, DATASET_COLUMNS, optional=("sigma_per_s",))
        f, g, s = d["f_s_hz"], d["gamma2_per_s"], d.get("sigma_per_s")
    if s is not None and not np.any(s > 0):
        s = None
    try:
        return RateCurve(f, g, s, label)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------------
# traces, calibration, JSON
# --------------------------------------------------------------------------

def write_trace_csv(path, trace: CoherenceTrace) -> None:
    rows = zip(trace.t_cpmg, trace.coherence, trace.std_err)
    atomic_write_text(path, _csv_text(TRACE_COLUMNS, rows))


def read_trace_csv(path, route: Route | str = Route.TRAJECTORY) -> CoherenceTrace:
    d = _read_csv(path, TRACE_COLUMNS, optional=("std_err",))
    try:
        return CoherenceTrace(d["t_cpmg_s"], d["coherence"], d.get("std_err"), route)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def read_calibration_csv(path) -> np.ndarray:
    """(power, gamma) pairs from ``power,gamma_per_s``."""
    d = _read_csv(path, CALIBRATION_COLUMNS)
    return np.column_stack([d["power"], d["gamma_per_s"]])


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _clean(o):
    # JSON has no inf/nan; encode them as strings
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    return o


def dumps_json(obj) -> str:
    obj = json.loads(json.dumps(obj, default=_json_default))
    if isinstance(obj, dict):
        obj.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps_json(obj))


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not text.strip():
        raise DataFormatError(f"{path} is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
