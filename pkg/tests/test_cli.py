import json

import numpy as np
import pytest

from latvar.cli import main, parse_grid, parse_matrix, parse_shape, ScenarioError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parsers():
    assert parse_matrix("1,0;0,2").tolist() == [[1, 0], [0, 2]]
    assert parse_grid("1:2:3").tolist() == [1, 1.5, 2]
    assert parse_shape("box:0.5,0.25").size == (0.5, 0.25)
    assert parse_shape({"kind": "ball", "size": 2, "dim": 3}).dim == 3
    with pytest.raises(ScenarioError):
        parse_grid("1,1")
    with pytest.raises(ScenarioError):
        parse_matrix("1,0;0")


def test_variance_interval_phi(capsys):
    code, out, _ = run(capsys, "variance", "--lattice", "1", "--shape", "box:0.5", "--r", "0.1:10:100")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "r,mean,var_spectral,var_mc,mc_se,asymptote,phi,phi_runmean"
    rows = np.array([[float(v) if v else np.nan for v in ln.split(",")] for ln in lines[1:]])
    f = rows[:, 0] - np.floor(rows[:, 0])
    assert np.allclose(rows[:, 6], 6 * f * (1 - f), atol=1e-6)


def test_variance_unit_cube_zero(capsys):
    code, out, _ = run(capsys, "variance", "--lattice", "1,0;0,1", "--shape", "cube:1", "--r", "1",
                       "--routes", "spectral,mc", "--seed", "1", "--samples", "500")
    row = out.strip().splitlines()[1].split(",")
    assert code == 0
    assert float(row[2]) == pytest.approx(0, abs=1e-9) and float(row[3]) == 0
    assert row[5] == ""  # asymptote not selected


def test_singular_generator_exit_2(capsys):
    code, _, err = run(capsys, "variance", "--lattice", "1,2;2,4", "--shape", "cube:1")
    assert code == 2 and "singular generator" in err


def test_missing_seed_exit_2(capsys):
    code, _, err = run(capsys, "variance", "--lattice", "1", "--shape", "box:0.5", "--routes", "mc")
    assert code == 2 and "seed" in err


def test_numerical_failure_exit_1(capsys):
    code, _, err = run(capsys, "kernel-check", "--dim", "2", "--tau", "0.3", "--tol", "1e-30")
    assert code == 1 and "numerical failure" in err


def test_constant_json(capsys):
    code, out, _ = run(capsys, "constant", "--lattice", "1")
    data = json.loads(out)
    assert code == 0 and set(data) == {"c_t", "epstein_value", "truncation_radius", "tail_bound"}
    assert data["c_t"] == pytest.approx(1 / 12, abs=1e-10)
    _, out2, _ = run(capsys, "constant", "--lattice", "2,0;0,2")
    _, out1, _ = run(capsys, "constant", "--lattice", "1,0;0,1")
    assert json.loads(out2)["c_t"] == pytest.approx(8 * json.loads(out1)["c_t"], rel=1e-12)


def test_kernel_check(capsys):
    code, out, _ = run(capsys, "kernel-check", "--dim", "2", "--tau", "0,0.1,0.25,0.5")
    rows = [ln.split(",") for ln in out.strip().splitlines()[1:]]
    assert code == 0
    assert float(rows[0][1]) == pytest.approx(1, abs=1e-6) and float(rows[0][3]) == pytest.approx(1, abs=1e-6)
    assert max(float(r[5]) for r in rows) <= 1e-6


def test_covariogram_and_phi(capsys):
    code, out, _ = run(capsys, "covariogram", "--shape", "ball:1", "--dim", "3", "--t", "0,1")
    assert code == 0 and out.splitlines()[2].startswith("1,1.308996938995")
    code, out, _ = run(capsys, "phi", "--lattice", "1,0;0,1", "--shape", "ball:1", "--r", "0.5:5:10",
                       "--format", "json")
    assert code == 0 and len(json.loads(out)["rows"]) == 10


def test_scenario_file_and_override(tmp_path, capsys):
    sc = tmp_path / "s.json"
    sc.write_text(json.dumps({"lattice": [[1.0]], "shape": "box:0.25", "r": [1.0, 2.0], "format": "json"}))
    code, out, _ = run(capsys, "variance", "--scenario", str(sc), "--r", "1")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 1 and rows[0]["var_spectral"] == pytest.approx(0.25, abs=1e-9)


def test_out_file(tmp_path, capsys):
    p = tmp_path / "o.csv"
    assert main(["constant", "--lattice", "1", "--format", "csv", "--out", str(p)]) == 0
    assert p.read_text().startswith("c_t,epstein_value")
