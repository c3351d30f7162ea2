"""CSV/JSON writers with provenance headers.

Output is a pure function of the inputs (no timestamps or host names), so a
rerun with the same configuration and seed is byte-identical.
"""
from __future__ import annotations

import csv
import io
import json
import math
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from . import __version__


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return format(f, ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else str(f)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def provenance(meta: Mapping | None = None) -> dict:
    out = {"package": "criticalnets", "version": __version__}
    if meta:
        out.update(meta)
    return out


def write_csv(out: TextIO, columns: Sequence[str], rows: Iterable[Sequence], meta: Mapping | None = None):
    """Write ``# key: value`` header lines, a column header and the rows."""
    for k, v in provenance(meta).items():
        out.write(f"# {k}: {json.dumps(_jsonable(v), sort_keys=True)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])


def csv_text(columns, rows, meta=None) -> str:
    buf = io.StringIO()
    write_csv(buf, columns, rows, meta)
    return buf.getvalue()


def read_csv(stream: TextIO):
    """Inverse of :func:`write_csv`: returns (meta, columns, float array)."""
    meta = {}
    lines = []
    for line in stream:
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(": ")
            meta[key] = json.loads(val) if val else None
        elif line.strip():
            lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    data = [[float(x) if _isnum(x) else x for x in row] for row in reader]
    return meta, columns, data


def _isnum(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_json(out: TextIO, payload: Mapping, meta: Mapping | None = None):
    doc = {"provenance": provenance(meta), **_jsonable(dict(payload))}
    json.dump(doc, out, indent=2, sort_keys=True)
    out.write("\n")


def trace_rows(trace):
    """(layer, rho_mean, rho_stderr, runs) rows of a PropagationTrace."""
    runs = trace.ensemble.runs
    for l, m, s in zip(trace.layers, trace.rho_mean, trace.rho_stderr):
        yield int(l), float(m), float(s), runs


TRACE_COLUMNS = ("layer", "rho_mean", "rho_stderr", "runs")


def trace_meta(trace) -> dict:
    return {"config": trace.config.as_dict(), "seed": trace.ensemble.seed,
            "runs": trace.ensemble.runs, "block_size": trace.ensemble.block_size}
