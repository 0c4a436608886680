import json
import math

import numpy as np
import pytest

from conftest import UNIT
from logcave import io
from logcave.grid import Grid, PotentialGrid
from logcave.logconcave import from_potential, make_indicator
from logcave.minkowski import MinkowskiDatum1D


def test_numbers_are_json_safe():
    obj = io.to_jsonable({"a": np.inf, "b": -np.inf, "c": np.nan, "d": -0.0, "e": np.int64(3), "f": np.bool_(True)})
    assert obj == {"a": "inf", "b": "-inf", "c": None, "d": 0.0, "e": 3, "f": True}
    assert math.copysign(1.0, obj["d"]) == 1.0
    text = io.dumps(obj)
    assert text.endswith("\n") and json.loads(text) == obj


def test_dumps_is_deterministic():
    a = io.dumps({"z": 1.0, "a": [np.float64(0.1), 2]})
    b = io.dumps({"a": [0.1, 2], "z": 1.0})
    assert a == b


def test_potential_json_round_trip_with_body():
    f = make_indicator(UNIT)
    obj = json.loads(io.dumps(io.potential_to_json(f.potential)))
    u = io.potential_from_json(obj)
    assert u.grid == f.grid and u.body.interval == (-1.0, 1.0)
    assert np.array_equal(u.values, f.potential.values)


def test_potential_json_round_trip_2d():
    u = PotentialGrid.from_function(lambda x, y: x**2 + y**2, Grid([-1, -2], [1, 2], [5, 7]))
    v = io.potential_from_json(json.loads(io.dumps(io.potential_to_json(u))))
    assert v.grid == u.grid and np.array_equal(v.values, u.values)


def test_potential_json_errors():
    with pytest.raises(ValueError, match="grid"):
        io.potential_from_json({"values": [1]})
    g = Grid([-1], [1], [3]).to_json()
    with pytest.raises(ValueError, match="expected 3 values"):
        io.potential_from_json({"grid": g, "values": [0, 1]})
    with pytest.raises(ValueError):
        io.potential_from_json({"grid": g, "values": [0, "nope", 1]})


def test_potential_csv_round_trip(tmp_path):
    u = PotentialGrid.from_function(lambda x: x**2 / 2, Grid([-2], [2], [41]))
    text = io.potential_to_csv(u)
    assert text.splitlines()[0] == "x,u"
    v = io.potential_from_csv(text)
    assert np.allclose(v.values, u.values, rtol=0, atol=1e-15)
    path = tmp_path / "u.csv"
    io.write_potential(path, u)
    assert np.allclose(io.read_potential(path).values, u.values)


def test_csv_accepts_inf_and_no_header():
    v = io.potential_from_csv("-1,inf\n0,0\n1,inf\n")
    assert np.isinf(v.values[0]) and v.values[1] == 0.0


def test_csv_errors():
    with pytest.raises(ValueError, match="empty"):
        io.potential_from_csv("")
    with pytest.raises(ValueError, match="uniformly spaced"):
        io.potential_from_csv("x,u\n0,0\n1,1\n3,2\n")
    with pytest.raises(ValueError, match="two columns"):
        io.potential_from_csv("x,u\n0\n1,1\n")
    with pytest.raises(ValueError, match="at least two rows"):
        io.potential_from_csv("x,u\n0,0\n")


def test_logconcave_round_trip(tmp_path, semicircle):
    obj = json.loads(io.dumps(io.logconcave_to_json(semicircle)))
    g = io.logconcave_from_json(obj)
    assert g.class_tag == "Adoubleprime" and g.body.interval == (-1.0, 1.0)
    path = tmp_path / "f.json"
    path.write_text(io.dumps(io.logconcave_to_json(semicircle)))
    assert io.read_potential(path).grid == semicircle.grid


def test_datum_csv_round_trip(tmp_path):
    d = MinkowskiDatum1D.from_function(lambda y: np.exp(-y**2 / 2), Grid([-5], [5], [101]))
    path = tmp_path / "m.csv"
    path.write_text(io.datum_to_csv(d))
    e = io.read_datum(path)
    assert e.grid == d.grid and np.array_equal(e.density, d.density)


def test_write_csv(tmp_path):
    path = tmp_path / "t.csv"
    io.write_csv(path, ["tail", "y"], [["a", "b"], [1.0, np.inf]])
    assert path.read_text() == "tail,y\na,1.0\nb,inf\n"


def test_function_file_of_gaussian(tmp_path):
    f = from_potential(lambda x: x**2 / 2)
    path = tmp_path / "g.json"
    path.write_text(io.dumps(io.logconcave_to_json(f)))
    assert io.logconcave_from_json(json.loads(path.read_text())).class_tag == "Aprime"
