"""Deterministic data files: CSV with '#key=value' metadata headers, canonical JSON."""

from __future__ import annotations

import json
import math

import numpy as np


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def _meta_value(v):
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"), default=_json_default)
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_csv(path, columns, rows, meta=None):
    """Write rows under a header line, preceded by '#key=value' lines in sorted key order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(meta or {}):
            fh.write(f"#{key}={_meta_value(meta[key])}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv(path):
    """Inverse of :func:`write_csv`: returns (meta dict of strings, column names, float array)."""
    meta, header, data = {}, None, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                k, _, v = line[1:].partition("=")
                meta[k] = v
            elif header is None:
                header = line.split(",")
            elif line:
                data.append([float(x) for x in line.split(",")])
    return meta, header, np.array(data, dtype=float).reshape(-1, len(header or []))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(o):
    """Replace non-finite floats by strings so the output is strict JSON."""
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)):
        x = float(o)
        return x if math.isfinite(x) else repr(x)
    return o


def dumps(obj):
    return json.dumps(_clean(json.loads(json.dumps(obj, default=_json_default))), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))
