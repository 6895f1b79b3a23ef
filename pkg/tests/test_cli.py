import csv
import io
import json
import math

import pytest

from growthlab.cli import EXIT_OK, EXIT_UNEXPECTED, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path):
    space = {"atoms": [{"id": "u", "p": 0.5}, {"id": "d", "p": 0.5}],
             "partitions": [[["u", "d"]], [["u"], ["d"]]]}
    proc = {"kind": "explicit", "values": [[1, 1], [2, 0.5]], "tail": "linear"}
    iid = {"kind": "iid", "v0": 1.0, "step": [{"x": -0.5, "p": 0.5}, {"x": 0.5, "p": 0.5}]}
    paths = {}
    for name, doc in (("space", space), ("proc", proc), ("iid", iid)):
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(json.dumps(doc))
    paths["broken"] = tmp_path / "broken.json"
    paths["broken"].write_text('{"kind": "iid",\n  "step": [}\n')
    return paths


def test_eval_iid_closed_form(capsys, files):
    code, out, _ = run(capsys, "eval", "--process", str(files["iid"]), "--gamma", "1", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["records"][0]["value"] == pytest.approx(math.log(math.cosh(0.5)), abs=1e-15)
    assert "metadata" in doc and doc["config"]["gamma"] == [1.0]


def test_eval_explicit_csv(capsys, files):
    code, out, _ = run(capsys, "eval", "--process", str(files["proc"]), "--space", str(files["space"]),
                       "--t", "1", "--gamma", "-1", "--gamma", "1", "--tmax", "300", "--window", "20", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    up = [r for r in rows if r["cell"] == "0"]
    assert float(up[0]["value"]) == pytest.approx(math.log(2), rel=1e-12)


def test_eval_assessor_table(capsys, files):
    code, out, _ = run(capsys, "eval", "--process", str(files["proc"]), "--space", str(files["space"]),
                       "--assessor", "neg_avar:0.5", "--tmax", "300", "--window", "20")
    assert code == EXIT_OK
    assert out.startswith("# config:") and "neg_avar" in out


def test_eval_builtin(capsys, tmp_path):
    p = tmp_path / "b.json"
    p.write_text(json.dumps({"kind": "builtin", "name": "dyadic_vhat", "params": {"depth": 6}}))
    code, out, _ = run(capsys, "eval", "--process", str(p), "--gamma", "1", "--tmax", "400", "--window", "10",
                       "--format", "json")
    assert code == EXIT_OK
    # finite-horizon bias of the gamma = 1 estimate is about ln(2^6) / T_max
    assert json.loads(out)["records"][0]["value"] == pytest.approx(1 - 2 ** -7 - math.log(64) / 400, abs=2e-3)


@pytest.mark.parametrize("argv", [
    ["eval", "--process", "{iid}", "--tmax", "5", "--t", "5"],
    ["eval", "--process", "{iid}", "--tmax", "60", "--window", "60"],
    ["eval", "--process", "{iid}", "--gamma", "1", "--assessor", "entropic:1"],
    ["eval", "--process", "{broken}"],
    ["eval", "--process", "{missing}"],
    ["eval", "--process", "{proc}"],
    ["eval", "--process", "{iid}", "--assessor", "bogus:1"],
    ["scenario", "nope"],
    ["scenario", "gaussian_iid", "--grid", "10"],
    ["props", "--property", "locality", "--trials", "0"],
    ["props", "--property", "nonsense"],
    ["props"],
    ["frobnicate"],
])
def test_usage_errors(capsys, files, tmp_path, argv):
    paths = {k: str(v) for k, v in files.items()}
    paths["missing"] = str(tmp_path / "missing.json")
    code, _, err = run(capsys, *[a.format(**paths) for a in argv])
    assert code == EXIT_USAGE
    assert err


def test_broken_json_location(capsys, files):
    _, _, err = run(capsys, "eval", "--process", str(files["broken"]))
    assert "broken.json:2:" in err


def test_scenario_counterexample_exit_ok(capsys):
    code, out, _ = run(capsys, "scenario", "notacc", "--grid", "512", "--tmax", "500", "--window", "20",
                       "--format", "json")
    assert code == EXIT_OK
    recs = json.loads(out)["records"]
    assert all(r["verdict"] == "pass" for r in recs)
    assert any("violation" in r["quantity"] for r in recs)


def test_scenario_failure_exit(capsys):
    # a window larger than the dyadic depth can resolve cannot meet the tolerance
    code, out, _ = run(capsys, "scenario", "dyadic_vhat", "--depth", "4", "--tmax", "60", "--window", "5",
                       "--tol", "1e-4", "--format", "json")
    assert code == EXIT_UNEXPECTED
    assert any(r["verdict"] == "fail" for r in json.loads(out)["records"])


def test_scenario_fatou_table(capsys):
    code, out, _ = run(capsys, "scenario", "fatou_remark")
    assert code == EXIT_OK and "-inf" in out and "inf" in out


def test_props_expected_fail(capsys):
    code, out, _ = run(capsys, "props", "--property", "strong_tc", "--assessor", "neg_avar:0.5", "--trials", "100",
                       "--format", "json")
    assert code == EXIT_OK
    rec = json.loads(out)["records"][0]
    assert rec["expected"] == "fail" and rec["verdict"] == "fail" and rec["witness"] is not None
    assert not rec["unexpected"]


def test_props_pass_and_determinism(capsys):
    argv = ["props", "--property", "locality", "--property", "scale_invariance", "--assessor", "entropic:0.5",
            "--trials", "20", "--seed", "3", "--format", "json"]
    code, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    assert code == EXIT_OK
    da, db = json.loads(a), json.loads(b)
    assert da["records"] == db["records"] and da["config"] == db["config"]
    assert [r["verdict"] for r in da["records"]] == ["pass", "pass"]


def test_props_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"campaigns": [
        {"property": "cash_additivity", "assessor": "entropic:-1", "trials": 10},
        {"property": "monotonicity", "assessor": {"kind": "neg_avar", "alpha": 0.2}, "trials": 10, "seed": 4},
    ]}))
    out_file = tmp_path / "out.csv"
    code, out, _ = run(capsys, "props", "--config", str(cfg), "--format", "csv", "--out", str(out_file))
    assert code == EXIT_OK and out == ""
    rows = list(csv.DictReader(out_file.open()))
    assert [r["verdict"] for r in rows] == ["pass", "pass"]


def test_threads_env_same_output(capsys, monkeypatch):
    argv = ["scenario", "all", "--grid", "257", "--tmax", "240", "--window", "10", "--depth", "6", "--format", "csv"]
    monkeypatch.setenv("GROWTHLAB_THREADS", "1")
    _, a, _ = run(capsys, *argv)
    monkeypatch.setenv("GROWTHLAB_THREADS", "4")
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
