"""On-disk formats.

Feature matrix (``.fmx``), all integers little-endian::

    b"FMX1" | n_rows: u64 | n_cols: u64 | n_rows*n_cols float64, row-major

Model (``.json``), UTF-8, members in this order::

    {"version": 1, "dim": C, "eps": e, "mu": [...], "u": [...], "w": [...], "a": [...]}

Floats are written with Python's shortest round-trip ``repr`` so a write/read
cycle is exact.  The raw diagonal ``u`` is stored rather than ``d``.
"""
import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, LengthError, ParseError, SchemaError, VersionError
from .model import FeatureBatch, LcmParams

MAGIC = b"FMX1"
_HEADER = struct.Struct("<4sQQ")
MODEL_VERSION = 1
_MODEL_KEYS = ("version", "dim", "eps", "mu", "u", "w", "a")


def write_feature_matrix(batch, path) -> None:
    x = batch.data if isinstance(batch, FeatureBatch) else np.asarray(batch, dtype=np.float64)
    if x.ndim != 2:
        raise FormatError(f"feature matrix must be 2-D, got shape {x.shape}")
    payload = np.ascontiguousarray(x, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, x.shape[0], x.shape[1]))
        fh.write(payload)


def read_feature_matrix(path) -> FeatureBatch:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise LengthError(_HEADER.size, len(raw), what="header")
    magic, n_rows, n_cols = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    expected = 8 * n_rows * n_cols
    actual = len(raw) - _HEADER.size
    if actual != expected:
        raise LengthError(expected, actual)
    if n_rows < 1 or n_cols < 1:
        raise FormatError(f"feature matrix must be non-empty, header says {n_rows}x{n_cols}")
    x = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n_rows, n_cols)
    bad = ~np.isfinite(x)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise DataError(f"non-finite value at row {r}, column {c}")
    return FeatureBatch(x.astype(np.float64))


def read_csv(path) -> FeatureBatch:
    """Headerless numeric CSV, one sample per row. Line/column numbers are 1-based."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not tok.strip() for tok in row):
                continue
            vals = []
            for col, tok in enumerate(row, start=1):
                try:
                    val = float(tok)
                except ValueError:
                    raise ParseError(f"cannot parse {tok!r} as a number", lineno, col) from None
                if not math.isfinite(val):
                    raise ParseError(f"non-finite value {tok!r}", lineno, col)
                vals.append(val)
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(f"ragged row: {len(vals)} fields, expected {width}", lineno)
            rows.append(vals)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return FeatureBatch(np.array(rows))


def read_features(path) -> FeatureBatch:
    """Dispatch on extension: ``.csv`` is text, anything else is FMX."""
    if str(path).lower().endswith(".csv"):
        return read_csv(path)
    return read_feature_matrix(path)


def model_to_json(p: LcmParams) -> str:
    obj = {
        "version": MODEL_VERSION,
        "dim": p.dim,
        "eps": p.eps,
        "mu": p.mu.tolist(),
        "u": p.u.tolist(),
        "w": p.w.tolist(),
        "a": p.a.tolist(),
    }
    return json.dumps(obj, allow_nan=False) + "\n"


def model_from_json(text: str) -> LcmParams:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("model file must hold a JSON object")
    if "version" not in obj:
        raise SchemaError("missing member 'version'")
    if obj["version"] != MODEL_VERSION or isinstance(obj["version"], bool):
        raise VersionError(f"unsupported model version {obj['version']!r}")
    extra = set(obj) - set(_MODEL_KEYS)
    if extra:
        raise SchemaError(f"unknown members: {sorted(extra)}")
    missing = [k for k in _MODEL_KEYS if k not in obj]
    if missing:
        raise SchemaError(f"missing members: {missing}")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SchemaError(f"'dim' must be a positive integer, got {dim!r}")
    eps = obj["eps"]
    if not isinstance(eps, (int, float)) or isinstance(eps, bool) or not eps > 0:
        raise SchemaError(f"'eps' must be a positive number, got {eps!r}")
    arrays = {}
    for key in ("mu", "u", "w", "a"):
        val = obj[key]
        if not isinstance(val, list) or len(val) != dim:
            n = len(val) if isinstance(val, list) else type(val).__name__
            raise SchemaError(f"'{key}' must be an array of {dim} numbers, got {n}")
        if not all(isinstance(e, (int, float)) and not isinstance(e, bool) for e in val):
            raise SchemaError(f"'{key}' must contain only numbers")
        arrays[key] = np.array(val, dtype=np.float64)
    return LcmParams(arrays["u"], arrays["w"], arrays["a"], eps=float(eps), mu=arrays["mu"])


def write_model(p: LcmParams, path) -> None:
    Path(path).write_text(model_to_json(p), encoding="utf-8")


def read_model(path) -> LcmParams:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
