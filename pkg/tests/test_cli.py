import csv
import io
import json
import subprocess
import sys

import pytest

from gaussqfim.cli import main

THERMAL_SPEC = {
    "probe": {"type": "thermal", "nbar": 1},
    "channel": [{"type": "squeeze", "param": "r"}, {"type": "rotate", "param": "phi"}],
    "parameters": ["r", "phi"],
    "values": {"r": 0.5, "phi": 0.3},
}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_example_displacement_json(capsys):
    code, out, _ = run(capsys, "example", "displacement", "--nbar", "1", "--r", "0")
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["bound_rld"] == pytest.approx(4.0)
    assert doc["report"]["bound_sld"] == pytest.approx(3.0)
    assert doc["residuals_passed"] is True


def test_example_fixed_field_set(capsys):
    _, out, _ = run(capsys, "example", "coherent-sr")
    doc = json.loads(out)
    assert list(doc) == ["example", "model", "report", "residuals", "residuals_passed"]
    assert set(doc["report"]) == {
        "parameters", "num_measurements", "rld_qfim", "sld_qfim", "saturation", "saturation_norm",
        "bound_rld", "bound_sld", "bound_mi", "ratio", "attainable", "restricted",
    }
    assert doc["report"]["saturation"][0][1] == pytest.approx(2.94303552937, rel=1e-10)


def test_example_csv_and_measurements(capsys):
    code, out, _ = run(capsys, "example", "displacement", "--measurements", "2", "--format", "csv")
    assert code == 0
    rows = dict(csv.reader(io.StringIO(out)))
    assert rows["quantity"] == "value"
    assert float(rows["bound_rld"]) == pytest.approx(2.0)


def test_example_domain_errors(capsys):
    code, _, err = run(capsys, "example", "thermal-sr", "--nbar", "-1")
    assert code == 2 and "nbar" in err
    code, _, err = run(capsys, "example", "displacement", "--phi", "0.2")
    assert code == 2
    with pytest.raises(SystemExit) as info:
        main(["example", "thermal-sr", "--measurements", "0"])
    assert info.value.code == 2


def test_example_singular_qfim_exit_one(capsys):
    code, _, err = run(capsys, "example", "thermal-sr", "--r", "0")
    assert code == 1 and "singular" in err


@pytest.mark.parametrize("name", ["displacement", "thermal-sr", "coherent-sr"])
def test_check_builtins(capsys, name):
    code, out, _ = run(capsys, "check", "--example", name)
    assert code == 0
    assert out and all(line.startswith("PASS") for line in out.splitlines())


def test_check_spec_file(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(THERMAL_SPEC))
    code, out, _ = run(capsys, "check", "--spec", str(p))
    assert code == 0


def test_check_unphysical_probe(tmp_path, capsys):
    spec = {
        "probe": {"type": "explicit", "mean": [0, 0], "cov": [[0.5, 0], [0, 0.5]]},
        "channel": [{"type": "rotate", "param": "phi"}],
        "parameters": ["phi"],
        "values": {"phi": 0.1},
    }
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(spec))
    code, out, _ = run(capsys, "check", "--spec", str(p))
    assert code == 1
    assert "FAIL state_validity" in out


def test_check_parse_errors(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{")
    assert run(capsys, "check", "--spec", str(p))[0] == 2
    bad = dict(THERMAL_SPEC, channel=[{"type": "squeeze", "param": "x"}])
    p.write_text(json.dumps(bad))
    code, _, err = run(capsys, "check", "--spec", str(p))
    assert code == 2 and "channel[0].param" in err
    assert run(capsys, "check", "--spec", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "check")[0] == 2


def write_sweep(tmp_path, **kw):
    doc = {
        "model": THERMAL_SPEC,
        "axes": [{"name": "nbar", "start": 0.5, "stop": 2.0, "step": 0.5}, {"name": "r", "start": 0.5, "stop": 1.0, "step": 0.5}],
        "outputs": ["ratio", "B_MI", "saturation_norm"],
    }
    doc.update(kw)
    p = tmp_path / "sweep.json"
    p.write_text(json.dumps(doc))
    return p


def test_sweep_csv_row_major(tmp_path, capsys):
    out = tmp_path / "out.csv"
    code, _, _ = run(capsys, "sweep", "--spec", str(write_sweep(tmp_path)), "--out", str(out))
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["nbar", "r", "ratio", "B_MI", "saturation_norm"]
    grid = [(float(a), float(b)) for a, b, *_ in rows[1:]]
    assert grid == [(n, r) for n in (0.5, 1.0, 1.5, 2.0) for r in (0.5, 1.0)]
    ratios = [float(row[2]) for row in rows[1:] if row[1] == "1"]
    assert ratios == sorted(ratios)


def test_sweep_json_and_determinism(tmp_path, capsys):
    spec = write_sweep(tmp_path)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "sweep", "--spec", str(spec), "--out", str(a), "--format", "json")
    run(capsys, "sweep", "--spec", str(spec), "--out", str(b), "--format", "json")
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert len(doc["rows"]) == 8 and doc["columns"][0] == "nbar"


def test_sweep_nan_rows_and_all_fail(tmp_path, capsys):
    out = tmp_path / "o.csv"
    spec = write_sweep(tmp_path, axes=[{"name": "r", "start": 0.0, "stop": 0.5, "step": 0.5}])
    code, _, err = run(capsys, "sweep", "--spec", str(spec), "--out", str(out))
    assert code == 0 and "warning" in err
    rows = list(csv.reader(out.open()))
    assert rows[1][1:] == ["nan"] * 3
    spec = write_sweep(tmp_path, axes=[{"name": "r", "start": 0.0, "stop": 0.0, "step": 0.5}])
    code, _, _ = run(capsys, "sweep", "--spec", str(spec), "--out", str(out))
    assert code == 1


def test_sweep_io_errors(tmp_path, capsys):
    spec = write_sweep(tmp_path)
    code, _, err = run(capsys, "sweep", "--spec", str(spec), "--out", str(tmp_path / "nodir" / "x.csv"))
    assert code == 2 and "cannot write" in err
    code, _, _ = run(capsys, "sweep", "--spec", str(tmp_path / "none.json"), "--out", "-")
    assert code == 2


def test_console_script_byte_identical():
    cmd = [sys.executable, "-m", "gaussqfim.cli", "example", "thermal-sr", "--nbar", "1", "--r", "0.5", "--phi", "0.3", "--format", "json"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second
    assert json.loads(first)["report"]["bound_sld"] == pytest.approx(0.38312481354806893, rel=1e-12)
