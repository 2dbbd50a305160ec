"""JSON formats and a deterministic writer.

Floats are written with 17 significant digits and non-finite values as the
strings ``"inf"``, ``"-inf"`` and ``"nan"``; mapping keys keep insertion
order.  The same object therefore always serializes to the same bytes.
"""

import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .lattice import LatticeBasis, SampleGrid
from .series import FourierSeries, PeriodicSamples

__all__ = ["dumps", "loads", "read_json", "write_json", "parse_basis", "series_to_json",
           "series_from_json", "samples_to_json", "samples_from_json", "parse_float"]


def _float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e16:
        # keep integral floats visibly floating point
        return f"{x:.1f}"
    return format(x, ".17g")


def _write(obj, out, indent, level):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            out.append((sep if i else "") + pad + json.dumps(str(k)) + ": ")
            _write(v, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = obj.tolist() if isinstance(obj, np.ndarray) else obj
        if not items:
            out.append("[]")
            return
        # short numeric rows stay on one line
        flat = all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in items)
        out.append("[")
        for i, v in enumerate(items):
            out.append((", " if i else "") if flat else ((sep if i else "") + pad))
            _write(v, out, indent, level + 1)
        out.append("]" if flat else end + "]")
    elif isinstance(obj, complex):
        _write([obj.real, obj.imag], out, indent, level)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    out = []
    _write(obj, out, indent, 0)
    return "".join(out) + "\n"


def parse_float(x):
    if isinstance(x, str):
        table = {"inf": math.inf, "+inf": math.inf, "-inf": -math.inf, "nan": math.nan}
        if x.lower() in table:
            return table[x.lower()]
    return float(x)


def loads(text):
    return json.loads(text)


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError("cannot read JSON input", path=str(path), reason=str(exc)) from None


def write_json(obj, path):
    Path(path).write_text(dumps(obj))


def parse_basis(spec):
    """Basis from ``"idN"``, a JSON matrix string, a mapping or a nested list.

    Matrices are given row by row; column j of the matrix is the edge vector e_j.
    """
    if isinstance(spec, LatticeBasis):
        return spec
    if isinstance(spec, dict):
        spec = spec.get("basis")
    if isinstance(spec, str):
        s = spec.strip()
        if s.startswith("id") and s[2:].isdigit():
            return LatticeBasis.identity(int(s[2:]))
        if Path(s).is_file():
            return parse_basis(read_json(s))
        try:
            spec = json.loads(s)
        except json.JSONDecodeError:
            raise ValidationError("basis must be idN, a JSON matrix or a file", basis=spec) from None
    if isinstance(spec, (int, float)):
        spec = [[spec]]
    try:
        return LatticeBasis(np.array(spec, dtype=float))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("basis is not a numeric square matrix", basis=repr(spec)) from None


def series_to_json(f):
    return {
        "basis": f.lattice.basis.tolist(),
        "coefficients": [{"index": [int(v) for v in k], "re": float(c.real), "im": float(c.imag)}
                         for k, c in zip(f.indices, f.values)],
    }


def _unwrap(obj):
    # accept a command-line envelope directly
    if isinstance(obj, dict) and "result" in obj and "version" in obj:
        return obj["result"]
    return obj


def series_from_json(obj):
    obj = _unwrap(obj)
    if not isinstance(obj, dict) or "coefficients" not in obj:
        raise ValidationError("series JSON needs 'basis' and 'coefficients'")
    L = parse_basis(obj.get("basis", "id1"))
    coeffs = {}
    for entry in obj["coefficients"]:
        idx = tuple(int(v) for v in entry["index"])
        if len(idx) != L.dim:
            raise ValidationError("coefficient index has wrong length", index=list(idx), d=L.dim)
        coeffs[idx] = complex(parse_float(entry.get("re", 0.0)), parse_float(entry.get("im", 0.0)))
    return FourierSeries(L, coeffs)


def samples_to_json(s):
    return {
        "basis": s.grid.basis.basis.tolist(),
        "n": s.grid.n,
        "values": [[float(v.real), float(v.imag)] for v in s.values],
    }


def samples_from_json(obj):
    obj = _unwrap(obj)
    if not isinstance(obj, dict) or "values" not in obj or "n" not in obj:
        raise ValidationError("samples JSON needs 'basis', 'n' and 'values'")
    L = parse_basis(obj.get("basis", "id1"))
    vals = np.array([complex(parse_float(v[0]), parse_float(v[1])) if isinstance(v, list)
                     else complex(parse_float(v)) for v in obj["values"]])
    return PeriodicSamples(SampleGrid(L, int(obj["n"])), vals)
