import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from filippov_boost import cli
from filippov_boost.bifurcation import BifurcationSet
from filippov_boost.integrator import IntegrationError

jsonschema = pytest.importorskip("jsonschema")

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def schema(name):
    return json.loads((SCHEMAS / name).read_text())


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def check_manifest(out: Path, command: str):
    man = out.with_name(out.stem + ".manifest.json")
    doc = json.loads(man.read_text())
    jsonschema.validate(doc, schema("manifest.schema.json"))
    assert doc["command"] == command
    assert str(out) in doc["outputs"]
    return doc


# ----------------------------------------------------------------- simulate

def test_simulate_converges(tmp_path):
    out = tmp_path / "traj.csv"
    code = cli.main(["simulate", "--a", "0.2", "--k", "1.5", "--omega", "1", "--yr", "4",
                     "--x0", "3.3", "--y0", "4.05", "--z0", "0", "--out", str(out)])
    assert code == 0
    rows = read_rows(out)
    last = np.array([float(rows[-1][c]) for c in "xyz"])
    assert np.linalg.norm(last - [3.2, 4.0, 0.0]) < 1e-4
    doc = check_manifest(out, "simulate")
    assert doc["params"]["a"] == 0.2 and doc["tolerances"]["rel_tol"] == 1e-9


def test_simulate_stationary(tmp_path):
    out = tmp_path / "q.csv"
    assert cli.main(["simulate", "--a", "0.2", "--k", "1.5", "--x0", "3.2", "--y0", "4", "--z0", "0",
                     "--out", str(out)]) == 0
    rows = read_rows(out)
    pts = np.array([[float(r[c]) for c in "xyz"] for r in rows])
    assert np.all(np.linalg.norm(pts - [3.2, 4.0, 0.0], axis=1) <= 1e-9)


def test_simulate_invalid_parameters(tmp_path, capsys):
    args = ["simulate", "--a", "0.2", "--k", "1.5", "--omega", "0", "--x0", "1", "--y0", "1", "--z0", "0",
            "--out", str(tmp_path / "t.csv")]
    assert cli.main(args) == 2
    assert "omega" in capsys.readouterr().err
    assert not (tmp_path / "t.csv").exists()


def test_simulate_missing_option(tmp_path):
    assert cli.main(["simulate", "--a", "0.2", "--k", "1.5", "--out", str(tmp_path / "t.csv")]) == 2


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--bogus", "1"])
    assert exc.value.code == 2


def test_simulate_integrator_failure(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise IntegrationError("step size underflow")

    monkeypatch.setattr(cli, "simulate", boom)
    assert cli.main(["simulate", "--a", "0.2", "--k", "1.5", "--x0", "1", "--y0", "1", "--z0", "1",
                     "--out", str(tmp_path / "t.csv")]) == 3


def test_simulate_is_byte_identical(tmp_path):
    out = tmp_path / "t.csv"
    args = ["simulate", "--a", "0.2", "--k", "1.5", "--x0", "8", "--y0", "6", "--z0", "-1", "--tmax", "30",
            "--out", str(out)]
    cli.main(args)
    first = out.read_bytes(), out.with_name("t.manifest.json").read_bytes()
    cli.main(args)
    assert (out.read_bytes(), out.with_name("t.manifest.json").read_bytes()) == first


# ----------------------------------------------------------------- classify

@pytest.mark.parametrize(
    "ak, expected",
    [
        ((0.2, 1.5), {"q_kind": "stable pseudo-focus", "two_fold": "visible-invisible", "region": 5}),
        ((0.2, 0.5), {"q_kind": "pseudo-saddle", "region": 1}),
        ((0.6, 3.0), {"q_kind": "stable pseudo-node"}),
    ],
)
def test_classify(ak, expected, capsys):
    assert cli.main(["classify", "--a", str(ak[0]), "--k", str(ak[1]), "--omega", "1", "--yr", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, schema("classify.schema.json"))
    for key, val in expected.items():
        assert doc[key] == val
    assert doc["q"] == [ak[0] * 16, 4.0, 0.0]


def test_classify_reports_closed_forms(capsys):
    cli.main(["classify", "--a", "0.2", "--k", "1.5"])
    doc = json.loads(capsys.readouterr().out)
    assert doc["k_H"] == pytest.approx(1.375)
    assert doc["k_minus"] == pytest.approx(0.845, abs=5e-4) and doc["k_plus"] == pytest.approx(8.155, abs=5e-4)
    assert doc["a_minus"] == pytest.approx(0.07322, abs=5e-6) and doc["a_plus"] == pytest.approx(0.42678, abs=5e-6)
    assert doc["two_fold_location"] == pytest.approx([4.6875, 3.125, 0.0])
    assert doc["q_region"] == "sliding"


def test_classify_degenerate_two_fold(capsys):
    assert cli.main(["classify", "--a", "0.2", "--k", "4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    jsonschema.validate(doc, schema("classify.schema.json"))
    assert doc["two_fold"] is None


def test_classify_invalid():
    assert cli.main(["classify", "--a", "3", "--k", "1.5"]) == 2
    assert cli.main(["classify", "--a", "0.2"]) == 2


# ---------------------------------------------------------- bifset, diagram

def test_bifset_small(tmp_path):
    out = tmp_path / "b.json"
    assert cli.main(["bifset", "--res", "20", "--grid-res", "6", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, schema("bifset.schema.json"))
    hc = np.array(doc["curves"]["homoclinic"])
    assert abs(np.interp(0.2, hc[:, 0], hc[:, 1]) - 1.573) < 0.005
    check_manifest(out, "bifset")


def test_bifset_failures_exit_3_with_partial_output(tmp_path, monkeypatch, caplog):
    real = cli.bifurcation_set

    def flaky(*args, **kwargs):
        res: BifurcationSet = real(*args, **kwargs)
        res.failures = [{"a": 0.1, "reason": "no sign change"}]
        return res

    monkeypatch.setattr(cli, "bifurcation_set", flaky)
    out = tmp_path / "b.json"
    assert cli.main(["bifset", "--res", "6", "--grid-res", "3", "--out", str(out)]) == 3
    doc = json.loads(out.read_text())
    assert doc["failures"] == [{"a": 0.1, "reason": "no sign change"}]
    assert "a=0.1" in caplog.text


def test_bifset_bad_ranges(tmp_path):
    assert cli.main(["bifset", "--a-min", "0.1", "--out", str(tmp_path / "b.json")]) == 2
    assert cli.main(["bifset", "--yr", "2", "--res", "4", "--out", str(tmp_path / "b.json")]) == 2


def test_diagram_small(tmp_path):
    out = tmp_path / "d.csv"
    assert cli.main(["diagram", "--a", "0.2", "--k-min", "1.3", "--k-max", "1.7", "--res", "9",
                     "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 9
    assert all(float(r["q_x"]) == 3.2 and float(r["q_y"]) == 4.0 for r in rows)
    with_cycle = [float(r["k"]) for r in rows if r["cycle"] == "1"]
    assert with_cycle == pytest.approx([1.4, 1.45, 1.5, 1.55])
    check_manifest(out, "diagram")


def test_diagram_jobs_do_not_change_output(tmp_path):
    base = ["diagram", "--a", "0.2", "--k-min", "1.45", "--k-max", "1.6", "--res", "4"]
    cli.main(base + ["--out", str(tmp_path / "one.csv")])
    cli.main(base + ["--jobs", "2", "--out", str(tmp_path / "two.csv")])
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()


def test_diagram_invalid(tmp_path):
    assert cli.main(["diagram", "--a", "0.2", "--k-min", "2", "--k-max", "1", "--out", str(tmp_path / "d.csv")]) == 2
    assert cli.main(["diagram", "--a", "0.2", "--jobs", "0", "--out", str(tmp_path / "d.csv")]) == 2


# ------------------------------------------------------------------- config

def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# point of interest\na = 0.2\nk=0.5\nomega=1\n")
    assert cli.main(["--config", str(cfg), "classify"]) == 0
    assert json.loads(capsys.readouterr().out)["region"] == 1
    assert cli.main(["--config", str(cfg), "classify", "--k", "1.5"]) == 0
    assert json.loads(capsys.readouterr().out)["region"] == 5


def test_config_keys_with_dashes(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("a=0.2\nk-min=1.45\nk_max=1.5\nres=2\n")
    out = tmp_path / "d.csv"
    assert cli.main(["--config", str(cfg), "diagram", "--out", str(out)]) == 0
    assert [float(r["k"]) for r in read_rows(out)] == [1.45, 1.5]


def test_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour=blue\n")
    assert cli.main(["--config", str(cfg), "classify", "--a", "0.2", "--k", "1.5"]) == 2
    cfg.write_text("just words\n")
    assert cli.main(["--config", str(cfg), "classify", "--a", "0.2", "--k", "1.5"]) == 2


# --------------------------------------------------------------- entry point

def test_console_script_and_log_level(tmp_path):
    env = dict(os.environ, FB_LOG_LEVEL="info")
    out = tmp_path / "t.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "filippov_boost.cli", "simulate", "--a", "0.2", "--k", "1.5",
         "--x0", "3.3", "--y0", "4.05", "--z0", "0", "--out", str(out)],
        capture_output=True, text=True, env=env,
    )
    assert proc.returncode == 0
    assert "INFO" in proc.stderr and "wrote" in proc.stderr
    env["FB_LOG_LEVEL"] = "error"
    proc = subprocess.run([sys.executable, "-m", "filippov_boost.cli", "simulate", "--a", "0.2", "--k", "1.5",
                           "--x0", "3.3", "--y0", "4.05", "--z0", "0", "--out", str(out)],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0 and proc.stderr == ""


@pytest.mark.slow
def test_default_bifset_and_diagram(tmp_path):
    b = tmp_path / "bifset.json"
    assert cli.main(["bifset", "--omega", "1", "--yr", "4", "--out", str(b)]) == 0
    hc = np.array(json.loads(b.read_text())["curves"]["homoclinic"])
    assert np.min(np.hypot(hc[:, 0] - 0.2, hc[:, 1] - 1.573)) < 0.005
    d = tmp_path / "diagram.csv"
    assert cli.main(["diagram", "--a", "0.2", "--k-min", "1.3", "--k-max", "1.7", "--out", str(d)]) == 0
    rows = read_rows(d)
    ks = [float(r["k"]) for r in rows if r["cycle"] == "1"]
    assert abs(min(ks) - 1.375) <= 0.005 and abs(max(ks) - 1.573) <= 0.005
    assert all(float(r["q_x"]) == 3.2 and float(r["q_y"]) == 4.0 for r in rows)
