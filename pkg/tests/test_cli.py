import json
import shutil
import subprocess
from pathlib import Path

import pytest

from gklab import cli
from gklab.errors import InvariantViolation

CIRCUITS = Path(__file__).resolve().parent.parent / "circuits"
TOY = str(CIRCUITS / "toy.gkl")
GC0 = str(CIRCUITS / "gc0_n12.gkl")


def invoke(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(out):
    """The JSON record with the timing key removed, re-serialised canonically."""
    recs = [json.loads(line) for line in out.splitlines() if line.startswith("{")]
    assert len(recs) == 1
    rec = recs[0]
    rec.pop("timing")
    return json.dumps(rec, sort_keys=True)


EXPERIMENTS = [
    ("interp", "--n", "8", "--k", "2", "--q", "5"),
    ("probpoly", "--gate", "gk", "--n", "6", "--k", "1", "--q", "3", "--eps", "0.1", "--trials", "200"),
    ("probpoly", "--gate", "or", "--n", "5", "--eps", "0.2", "--trials", "100", "--points", "sampled"),
    ("probpoly", "--gate", "circuit", "--circuit", TOY, "--eps", "0.2", "--trials", "50"),
    ("depthred", "--mode", "vv", "--n", "6", "--trials", "100"),
    ("depthred", "--mode", "depth2", "--n", "5", "--eps", "0.3"),
    ("sat", "--circuit", TOY, "--ell", "3", "--repeats", "9"),
    ("sat", "--circuit", GC0, "--brute"),
    ("switch", "--circuit", GC0, "--p", "0.05,0.1", "--trials", "100"),
    ("fourier", "--circuit", GC0, "--levels", "1,2,3"),
    ("hlf", "--grid", "3"),
    ("correlate", "--linear", "--n", "5"),
    ("correlate", "--circuit", TOY, "--target", "MOD3"),
    ("count", "--n", "30", "--k", "2"),
]


@pytest.mark.parametrize("argv", EXPERIMENTS, ids=lambda a: "-".join(a[:3]))
def test_reruns_are_byte_identical(capsys, argv):
    code1, out1, _ = invoke(capsys, *argv, "--seed", "7")
    code2, out2, _ = invoke(capsys, *argv, "--seed", "7")
    assert code1 == code2 == 0
    assert body(out1) == body(out2)
    rec = json.loads(out1)
    assert rec["config"]["seed"] == 7
    assert rec["command"] == argv[0]


def test_workers_do_not_change_reports(capsys):
    _, a, _ = invoke(capsys, "fourier", "--circuit", GC0, "--workers", "1")
    _, b, _ = invoke(capsys, "fourier", "--circuit", GC0, "--workers", "4")
    ra, rb = json.loads(a), json.loads(b)
    assert ra["result"] == rb["result"]


def test_sat_report_fields(capsys):
    code, out, _ = invoke(capsys, "sat", "--circuit", TOY, "--ell", "3", "--repeats", "9", "--seed", "1")
    assert code == 0
    res = json.loads(out)["result"]
    assert res["verdict"] in ("SAT", "UNSAT", "UNKNOWN")
    assert "timing" not in res
    assert res["params"]["repeats"] == 9


def test_text_output(capsys):
    code, out, _ = invoke(capsys, "count", "--n", "10", "--k", "2", "--text")
    assert code == 0
    assert out.startswith("# gklab count")
    assert "56" in out


def test_switch_csv(tmp_path, capsys):
    path = tmp_path / "trials.csv"
    code, _, _ = invoke(capsys, "switch", "--circuit", GC0, "--trials", "20", "--csv", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "p,trial,free,max_depth,deep,common_fail"
    assert len(lines) == 1 + 2 * 20


def test_hlf_verify_and_relation_files(tmp_path, capsys):
    code, out, _ = invoke(capsys, "hlf", "--grid", "2", "--seed", "3")
    rec = json.loads(out)["result"]
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps(rec["instance"]))
    zf = tmp_path / "z.txt"
    zf.write_text(rec["z"])
    code, out, _ = invoke(capsys, "hlf", "--instance", str(inst), "--verify", str(zf))
    assert code == 0 and json.loads(out)["result"]["valid"] is True

    ri = tmp_path / "rel.json"
    ri.write_text(json.dumps({"tag": "PHP", "inputs": ["1100", "0000"]}))
    ro = tmp_path / "out.json"
    ro.write_text(json.dumps(["1", "00"]))
    code, out, _ = invoke(capsys, "relation", "--instance", str(ri), "--output", str(ro))
    assert code == 0 and json.loads(out)["result"]["success"] is True


def test_depthred_emit(tmp_path, capsys):
    path = tmp_path / "c.gkl"
    code, out, _ = invoke(capsys, "depthred", "--mode", "depth2", "--n", "5", "--emit", str(path))
    assert code == 0
    assert json.loads(out)["result"]["equals_depth5_instance"] is True
    assert path.read_text().startswith("circuit ")


@pytest.mark.parametrize("argv", [
    ("sat", "--circuit", TOY, "--bogus"),
    ("frobnicate",),
    ("sat",),
    ("sat", "--circuit", "/nonexistent.gkl"),
    ("interp", "--n", "4", "--k", "1", "--q", "4"),
    ("hlf",),
    ("count", "--n", "-1", "--k", "0"),
    ("interp", "--n", "3", "--k", "1", "--seed", "-5"),
])
def test_user_errors_exit_one(capsys, argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 1
    assert err


def test_parse_error_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.gkl"
    bad.write_text("circuit t n=2\ngate g1 = XOR x1 x2\noutputs g1\n")
    code, _, err = invoke(capsys, "sat", "--circuit", str(bad))
    assert code == 1 and "line 2" in err


def test_resource_cap_exit_two(monkeypatch, capsys):
    monkeypatch.setenv("GKLAB_MAX_VARS", "6")
    code, _, err = invoke(capsys, "fourier", "--circuit", GC0)
    assert code == 2 and "limit" in err


def test_invariant_violation_exit_three(monkeypatch, capsys):
    def boom(a):
        raise InvariantViolation("synthetic")
    monkeypatch.setattr(cli, "cmd_count", boom)
    code, _, err = invoke(capsys, "count", "--n", "3", "--k", "1")
    assert code == 3 and "synthetic" in err


@pytest.mark.skipif(shutil.which("gklab") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["gklab", "count", "--n", "10", "--k", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["ball_size"] == 56
    proc = subprocess.run(["gklab", "count", "--nope"], capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr
