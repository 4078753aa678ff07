import json

import pytest

from fpp import __version__
from fpp.experiments import RunConfig, fmt, main

DIRAC = '{"kind":"dirac","c":1}'
UNIFORM = '{"kind":"uniform","lo":1,"hi":1.5}'


def _meta(line):
    assert line.startswith("# ")
    return json.loads(line[2:])


def test_scan_dirac(tmp_path, capsys):
    out = tmp_path / "scan.csv"
    assert main(["scan", "--spec", DIRAC, "--d", "2", "--n-max", "5", "--reps", "10", "--seed", "7",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    meta = _meta(lines[0])
    assert meta["version"] == __version__ and meta["config"]["master_seed"] == 7
    assert "workers" not in meta["config"]
    assert lines[1].startswith("n,a_mean")
    for line in lines[2:]:
        fields = line.split(",")
        assert fields[3] == "1" and fields[4] == "0"


def test_scan_to_stdout(capsys):
    assert main(["scan", "--spec", DIRAC, "--n-max", "2", "--reps", "3"]) == 0
    assert capsys.readouterr().out.splitlines()[1].startswith("n,")


def test_verify_coupling(tmp_path, capsys):
    out = tmp_path / "vc.jsonl"
    assert main(["verify-coupling", "--spec", UNIFORM, "--d", "2", "--n", "6", "--reps", "300", "--seed", "1",
                 "--out", str(out)]) == 0
    records = [json.loads(l) for l in out.read_text().splitlines()]
    assert "meta" in records[0]
    assert len(records) == 302
    summary = records[-1]["summary"]
    assert summary["ok"] and summary["min_slack_ti"] >= -1e-9
    assert json.loads(capsys.readouterr().out) == summary


def test_cs2_check(tmp_path):
    out = tmp_path / "cs2.jsonl"
    spec = '{"kind":"shifted_exponential","shift":1,"rate":1.5}'
    assert main(["cs2-check", "--spec", spec, "--n", "2", "--reps", "20", "--resamples", "8", "--out", str(out)]) == 0
    assert json.loads(out.read_text().splitlines()[-1])["summary"]["resamples"] == 8


def test_box_event_demo(capsys):
    spec = '{"kind":"uniform","lo":1,"hi":3}'
    assert main(["footnote-demo", "--spec", spec, "--a", "1.5", "--b", "2.5"]) == 0
    header, row = capsys.readouterr().out.splitlines()[1:3]
    assert header == "C,D,n,T_prev,T_n,reverified"
    C, D, n, t_prev, t_n, ok = row.split(",")
    assert float(t_prev) > float(t_n) and ok == "1"


def test_box_event_demo_reports_absence(capsys):
    spec = '{"kind":"uniform","lo":1,"hi":3}'
    assert main(["footnote-demo", "--spec", spec, "--a", "1.5", "--b", "2.5", "--max-n", "3"]) == 1
    assert capsys.readouterr().err.startswith("error:")


def test_counterexample_grid(tmp_path):
    out = tmp_path / "cx.csv"
    assert main(["counterexample", "--reps", "200", "--epsilons", "0.01", "--ps", "0.1,0.2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1].startswith("epsilon,p,") and len(lines) == 4


def test_estimate(capsys):
    assert main(["estimate", "--spec", DIRAC, "--n", "3", "--reps", "5", "--mode", "cylinder"]) == 0
    row = capsys.readouterr().out.splitlines()[2].split(",")
    assert row[:3] == ["3", "3", "0"]


def test_config_file_and_precedence(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"spec": {"kind": "dirac", "c": 2}, "n_max": 2, "replicates": 4, "master_seed": 5}))
    monkeypatch.setenv("FPP_SEED", "11")
    assert main(["scan", "--config", str(cfg), "--seed", "9"]) == 0
    assert _meta(capsys.readouterr().out.splitlines()[0])["config"]["master_seed"] == 9
    assert main(["scan", "--config", str(cfg)]) == 0
    assert _meta(capsys.readouterr().out.splitlines()[0])["config"]["master_seed"] == 5
    assert main(["scan", "--spec", DIRAC, "--n-max", "1", "--reps", "2"]) == 0
    assert _meta(capsys.readouterr().out.splitlines()[0])["config"]["master_seed"] == 11


@pytest.mark.parametrize("argv", [
    ["scan", "--spec", "not json", "--n-max", "2"],
    ["scan", "--n-max", "2"],
    ["scan", "--spec", DIRAC],
    ["bogus"],
    ["scan", "--spec", DIRAC, "--n-max", "2", "--d", "1"],
    ["scan", "--config", "/nonexistent.json"],
    ["verify-coupling", "--spec", '{"kind":"uniform","lo":1,"hi":3}', "--n", "2"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert err.startswith("error:")


def test_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"nmax": 3}')
    assert main(["scan", "--config", str(cfg)]) == 2


def test_output_identical_across_workers(tmp_path):
    paths = []
    for workers in ("1", "3"):
        out = tmp_path / f"scan{workers}.csv"
        assert main(["scan", "--spec", UNIFORM, "--n-max", "4", "--reps", "90", "--seed", "3", "--workers", workers,
                     "--out", str(out)]) == 0
        paths.append(out)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, 2.0**-60, 1e300):
        assert float(fmt(x)) == x
    assert fmt(None) == "" and fmt(True) == "1" and fmt(3) == "3"


def test_metadata_excludes_run_only_fields():
    meta = RunConfig(workers=8, out="x").metadata("scan")
    assert "workers" not in meta["config"] and "out" not in meta["config"]
