"""CSV/JSON persistence shared by the library and the CLI.

Every CSV is written with a fixed number format (12 significant digits) and
gets a ``.json`` sidecar carrying the run configuration and the library
version, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

SIG_DIGITS = 12


def fmt(x: Any) -> str:
    """Deterministic text form of a scalar."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0.0:
            return "0"
        return f"{x:.{SIG_DIGITS}g}"
    if isinstance(x, (complex, np.complexfloating)):
        raise TypeError("split complex values into real/imaginary columns before export")
    return str(x)


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else str(obj)
    return obj


def write_csv(
    path: str | Path,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config: Mapping[str, Any] | None = None,
) -> Path:
    """Write a CSV and its JSON sidecar; returns the CSV path."""
    from . import __version__

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    sidecar = {"version": __version__, "columns": list(header), "config": _jsonable(dict(config or {}))}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return path


def write_json(path: str | Path, record: Mapping[str, Any], config: Mapping[str, Any] | None = None) -> Path:
    from . import __version__

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"version": __version__, "config": _jsonable(dict(config or {})), "data": _jsonable(record)}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def rows_to_records(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> list[dict[str, Any]]:
    return [dict(zip(header, r)) for r in rows]
