"""JSON and CSV writers with a fixed float format.

Floats are written with 12 significant digits so that identical runs give
byte-identical files. Non-finite values become the strings ``"inf"``,
``"-inf"`` and ``"nan"`` in JSON.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1
FLOAT_FMT = "{:.12g}"

__all__ = ["SCHEMA_VERSION", "fmt_float", "to_jsonable", "dumps", "write_json", "write_csv",
           "read_json"]


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = FLOAT_FMT.format(x)
    return "0" if s == "-0" else s


def to_jsonable(obj):
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return fmt_float(x)
        return float(fmt_float(x))   # json then prints the shortest repr
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return to_jsonable(dataclasses.asdict(obj))
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, kind: str | None = None) -> str:
    payload = {"schema_version": SCHEMA_VERSION}
    if kind is not None:
        payload["kind"] = kind
    body = to_jsonable(obj)
    if isinstance(body, dict):
        payload.update(body)
    else:
        payload["data"] = body
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def write_json(path, obj, kind: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj, kind), encoding="utf-8")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])
    return path
