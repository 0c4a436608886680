import json
import subprocess
import sys

import numpy as np
import pytest

from logcave import io
from logcave.cli import main
from logcave.grid import Grid, PotentialGrid
from logcave.logconcave import from_potential, make_indicator
from logcave.minkowski import MinkowskiDatum1D

from conftest import UNIT


@pytest.fixture
def files(tmp_path):
    quad = PotentialGrid.from_function(lambda x: x**2 / 2, Grid([-6], [6], [601]))
    (tmp_path / "quad.json").write_text(io.dumps(io.potential_to_json(quad)))
    absu = PotentialGrid.from_function(np.abs, Grid([-3], [3], [601]))
    (tmp_path / "abs.csv").write_text(io.potential_to_csv(absu))
    (tmp_path / "bad.json").write_text("{not json")
    g = from_potential(lambda x: x**2 / 2)
    (tmp_path / "g.json").write_text(io.dumps(io.logconcave_to_json(g)))
    (tmp_path / "ind.json").write_text(io.dumps(io.logconcave_to_json(make_indicator(UNIT))))
    wide = Grid([-14.0], [14.0], [2801])
    data = {
        "gauss": lambda y: np.exp(-y**2 / 2),
        "shifted": lambda y: np.exp(-(y - 1) ** 2 / 2),
        "compact": lambda y: np.clip(1 - y**2, 0, None),
    }
    for name, fn in data.items():
        (tmp_path / f"{name}.csv").write_text(io.datum_to_csv(MinkowskiDatum1D.from_function(fn, wide)))
    expo = MinkowskiDatum1D.from_function(lambda y: 0.5 * np.exp(-np.abs(y)), Grid([-40.0], [40.0], [8001]))
    (tmp_path / "expo.csv").write_text(io.datum_to_csv(expo))
    return tmp_path


def run(*args):
    return main([str(a) for a in args])


def test_conjugate_writes_output(files, capsys):
    out = files / "quad_star.json"
    assert run("conjugate", "--in", files / "quad.json", "--out", out) == 0
    assert "involution residual" in capsys.readouterr().err
    obj = json.loads(out.read_text())
    assert obj["involution_residual"] <= 1e-3
    y = Grid.from_json(obj["conjugate"]["grid"]).axes()[0]
    vals = np.array([float(v) for v in obj["conjugate"]["values"]])
    m = np.abs(y) <= 5
    assert np.max(np.abs(vals[m] - y[m] ** 2 / 2)) <= 1e-3


def test_conjugate_of_abs_is_indicator(files, capsys):
    assert run("conjugate", "--in", files / "abs.csv", "--target-lo", -2, "--target-hi", 2) == 0
    obj = json.loads(capsys.readouterr().out)
    vals = obj["conjugate"]["values"]
    assert vals[0] == "inf" and vals[-1] == "inf"
    assert 0.0 in vals


def test_conjugate_csv_output(files):
    out = files / "abs_star.csv"
    assert run("conjugate", "--in", files / "abs.csv", "--target-lo", -2, "--target-hi", 2, "--out", out) == 0
    assert out.read_text().splitlines()[0] == "x,u"


def test_parse_failures_exit_2(files, capsys):
    assert run("conjugate", "--in", files / "bad.json") == 2
    assert "cannot read" in capsys.readouterr().err
    assert run("conjugate", "--in", files / "missing.json") == 2
    assert run("mass") == 2
    assert run("conjugate", "--in", files / "quad.json", "--grid-lo", 1, "--grid-hi", -1) == 2


def test_slope_clipping_exits_3(files, capsys):
    assert run("conjugate", "--in", files / "quad.json", "--target-lo", -0.5, "--target-hi", 0.5) == 3
    assert "slope range exceeded" in capsys.readouterr().err


def test_mass_entropy_and_diagnose(files, capsys):
    assert run("mass", "--in", files / "g.json") == 0
    assert json.loads(capsys.readouterr().out)["mass"] == pytest.approx(np.sqrt(2 * np.pi), rel=1e-6)
    assert run("entropy", "--in", files / "ind.json") == 0
    assert json.loads(capsys.readouterr().out)["entropy"] == pytest.approx(-2 * np.log(2), abs=1e-9)
    assert run("diagnose", "--in", files / "g.json") == 0
    assert json.loads(capsys.readouterr().out)["class"]["tag"] == "Aprime"
    assert run("diagnose", "--in", files / "gauss.csv") == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "solvable_Aprime"


def test_entropy_of_zero_mass_exits_2(tmp_path, capsys):
    # a spike in the plane: one finite node, zero Lebesgue mass
    path = tmp_path / "spike.json"
    vals = ["inf"] * 25
    vals[12] = 0.0
    path.write_text(json.dumps({"grid": {"lo": [-1, -1], "hi": [1, 1], "n": [5, 5]}, "values": vals}))
    assert run("entropy", "--in", path) == 2
    assert "mass" in capsys.readouterr().err


def test_oplus_and_deltaj(files, capsys):
    out = files / "h.json"
    assert run("oplus", "--in", files / "g.json", "--in", files / "g.json", "--beta", 0.5, "--out", out) == 0
    h = io.logconcave_from_json(json.loads(out.read_text()))
    assert h.class_tag == "Aprime"
    assert run("deltaj", "--in", files / "g.json", "--in", files / "g.json") == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["fd"]["value"] == pytest.approx(np.sqrt(2 * np.pi) / 2, rel=1e-3)
    assert obj["representation"] == pytest.approx(np.sqrt(2 * np.pi) / 2, rel=1e-4)
    assert obj["representation_method"] == "interior"


def test_measure(files, capsys):
    assert run("measure", "--in", files / "g.json") == 0
    mu = json.loads(capsys.readouterr().out)["mu"]
    assert sum(mu["weights"]) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-6)


def test_verify_suites(files, capsys):
    out = files / "report.json"
    assert run("verify", "--suite", "inequalities", "--out", out) == 0
    table = capsys.readouterr().out
    assert "PASS" in table and "FAIL" not in table
    reports = json.loads(out.read_text())
    assert all(r["holds"] for r in reports)


def test_verify_impossible_tolerance_exits_1(capsys):
    assert run("verify", "--suite", "inequalities", "--tol", 1e-12) == 1
    assert "FAIL" in capsys.readouterr().out


def test_verify_unknown_suite_exits_2(capsys):
    assert run("verify", "--suite", "nope") == 2
    assert "unknown suite" in capsys.readouterr().err


def test_verify_minkowski_with_datum(files):
    assert run("verify", "--suite", "minkowski", "--in", files / "gauss.csv") == 0


def test_solve_gaussian_datum(files, capsys):
    out = files / "sol.json"
    assert run("solve", "--in", files / "gauss.csv", "--out", out) == 0
    err = capsys.readouterr().err
    l1 = float(err.split("L1 recovery error:")[1].split()[0])
    assert l1 <= 2e-2
    obj = json.loads(out.read_text())
    assert obj["feasibility"] == "solvable_Aprime"
    heads = {k: (files / f"sol_{k}.csv").read_text().splitlines()[0] for k in ("phi", "f", "density", "trace")}
    assert heads == {"phi": "y,phi", "f": "x,u,f", "density": "y,m_input,m_recovered", "trace": "tail,y,trace"}


def test_solve_exit_codes(files, capsys):
    assert run("solve", "--in", files / "shifted.csv", "--out", files / "s.json") == 5
    assert "barycenter" in capsys.readouterr().err
    assert run("solve", "--in", files / "compact.csv", "--out", files / "c.json") == 4
    assert (files / "c_trace.csv").exists()
    # the exponential tail gives a slowly diverging trace on this window
    assert run("solve", "--in", files / "expo.csv", "--out", files / "e.json") == 6
    assert (files / "e_trace.csv").exists()


def test_solve_is_deterministic(files):
    run("solve", "--in", files / "gauss.csv", "--out", files / "a.json")
    run("solve", "--in", files / "gauss.csv", "--out", files / "b.json")
    assert (files / "a.json").read_bytes() == (files / "b.json").read_bytes()
    assert (files / "a_phi.csv").read_bytes() == (files / "b_phi.csv").read_bytes()


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 2


def test_console_entry_point_runs():
    res = subprocess.run([sys.executable, "-m", "logcave.cli", "verify", "--suite", "algebra"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "PASS" in res.stdout
