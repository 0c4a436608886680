"""JSON and CSV serialization.

``+inf`` is written as the string ``"inf"`` so files stay valid JSON.
Output is deterministic: keys sorted, floats written with ``repr`` precision.
"""
from __future__ import annotations

import csv
import io as _io
import json
import math

import numpy as np

from .bodies import ConvexBody
from .grid import Grid, PotentialGrid

__all__ = [
    "to_jsonable",
    "dumps",
    "potential_to_json",
    "potential_from_json",
    "potential_to_csv",
    "potential_from_csv",
    "logconcave_to_json",
    "logconcave_from_json",
    "read_potential",
    "write_potential",
    "datum_to_csv",
    "datum_from_csv",
    "read_datum",
    "write_csv",
]


def _num(v):
    v = float(v) + 0.0  # no negative zero in output
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if math.isnan(v):
        return None
    return v


def _parse(v):
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity"):
            return math.inf
        if s in ("-inf", "-infinity"):
            return -math.inf
        return float(s)
    return float(v)


def to_jsonable(obj):
    """Recursively convert numpy values, reports and infinities for ``json``."""
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def dumps(obj, indent=2):
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=indent) + "\n"


# -- potentials ------------------------------------------------------------


def potential_to_json(u):
    out = {"grid": u.grid.to_json(), "values": [_num(v) for v in u.values.ravel()]}
    if u.body is not None:
        out["body"] = u.body.to_json()
    return out


def potential_from_json(obj):
    if not isinstance(obj, dict) or "grid" not in obj or "values" not in obj:
        raise ValueError("potential JSON needs 'grid' and 'values'")
    grid = Grid.from_json(obj["grid"])
    vals = np.array([_parse(v) for v in obj["values"]], dtype=float)
    if vals.size != int(np.prod(grid.shape)):
        raise ValueError(f"expected {int(np.prod(grid.shape))} values, got {vals.size}")
    body = ConvexBody.from_json(obj["body"]) if obj.get("body") else None
    return PotentialGrid(grid, vals.reshape(grid.shape), body)


def potential_to_csv(u):
    if u.dim != 1:
        raise ValueError("CSV potentials are one-dimensional")
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "u"])
    for x, v in zip(u.grid.axes()[0], u.values):
        w.writerow([repr(float(x)), "inf" if math.isinf(v) else repr(float(v))])
    return buf.getvalue()


def _read_columns(text, names):
    rows = list(csv.reader(_io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError("empty CSV")
    head = [c.strip().lower() for c in rows[0]]
    if head[:2] == list(names):
        rows = rows[1:]
    cols = [[], []]
    for r in rows:
        if len(r) < 2:
            raise ValueError(f"CSV row needs two columns: {r}")
        cols[0].append(_parse(r[0]))
        cols[1].append(_parse(r[1]))
    a, b = np.array(cols[0]), np.array(cols[1])
    if a.size < 2:
        raise ValueError("CSV needs at least two rows")
    d = np.diff(a)
    if np.any(d <= 0) or not np.allclose(d, d[0], rtol=1e-6, atol=1e-12):
        raise ValueError(f"column {names[0]} must be uniformly spaced and increasing")
    return a, b


def potential_from_csv(text):
    x, u = _read_columns(text, ("x", "u"))
    return PotentialGrid(Grid([x[0]], [x[-1]], [x.size]), u)


def read_potential(path):
    """A potential from ``.json`` or ``.csv`` (by extension)."""
    with open(path) as fh:
        text = fh.read()
    if str(path).lower().endswith(".csv"):
        return potential_from_csv(text)
    obj = json.loads(text)
    if "potential" in obj:  # a LogConcaveFn file
        obj = obj["potential"]
    return potential_from_json(obj)


def write_potential(path, u):
    with open(path, "w") as fh:
        if str(path).lower().endswith(".csv"):
            fh.write(potential_to_csv(u))
        else:
            fh.write(dumps(potential_to_json(u)))


# -- log-concave functions ----------------------------------------------------


def logconcave_to_json(f):
    out = {"potential": potential_to_json(f.potential), "class": f.class_tag}
    if f.body is not None:
        out["body"] = f.body.to_json()
    return out


def logconcave_from_json(obj):
    from .logconcave import LogConcaveFn

    pot = potential_from_json(obj["potential"])
    body = ConvexBody.from_json(obj["body"]) if obj.get("body") else None
    return LogConcaveFn(pot, obj.get("class"), body)


# -- Minkowski data -------------------------------------------------------------


def datum_to_csv(datum):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y", "m"])
    for y, m in zip(datum.y, datum.density):
        w.writerow([repr(float(y)), repr(float(m))])
    return buf.getvalue()


def datum_from_csv(text):
    from .minkowski import MinkowskiDatum1D

    y, m = _read_columns(text, ("y", "m"))
    return MinkowskiDatum1D(Grid([y[0]], [y[-1]], [y.size]), m)


def read_datum(path):
    with open(path) as fh:
        return datum_from_csv(fh.read())


def write_csv(path, header, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_num(v) if not isinstance(v, str) else v for v in row])
