import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ["PENCIL_CLI"]
DATA = Path(__file__).resolve().parents[2] / "data"


def run(*args, env=None):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, env=env)


def test_forward_zero(tmp_path):
    out = tmp_path / "f.json"
    r = run("forward", "--config", DATA / "zero_m1.json", "--truncation", 5, "--out", out)
    assert r.returncode == 0, r.stderr
    doc = json.loads(out.read_text())
    assert doc["schema"] == 1
    for series in doc["coefficients"]["series"]:
        assert all(c["re"] == 0 and c["im"] == 0 for c in series["constants"])
        assert series["poles"] == []


def test_forward_one_mode():
    r = run("forward", "--config", DATA / "one_mode_m1.json", "--truncation", 4)
    assert r.returncode == 0, r.stderr
    doc = json.loads(r.stdout)
    poles = doc["coefficients"]["series"][0]["poles"]
    v11 = next(p for p in poles if (p["n"], p["j"], p["alpha"]) == (1, 1, 1))
    assert abs(v11["re"]) < 1e-12 and abs(v11["im"] - 0.3) < 1e-12


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"m": 1, "entries": [{"gamma": 0, "s": 0, "n": 1}, {"gamma": 0, "s": 9, "n": 1}]}')
    r = run("forward", "--config", bad)
    assert r.returncode == 2
    assert "entry 1" in r.stderr
    bad.write_text('{"m": 1, "entries": [')
    assert run("forward", "--config", bad).returncode == 2
    assert run("forward").returncode == 2
    assert run("bogus").returncode == 2


def test_spectrum():
    r = run("spectrum", "--config", DATA / "zero_m1.json", "--rmin", 0.3, "--rmax", 4.9)
    assert r.returncode == 0, r.stderr
    assert all(rep["count"] == 0 for rep in json.loads(r.stdout)["reports"])

    r = run("spectrum", "--config", DATA / "strong_coupling_m1.json")
    assert r.returncode == 0, r.stderr
    eig = json.loads(r.stdout)["reports"][0]["eigenvalues"]
    assert len(eig) == 1
    assert abs(eig[0]["re"]) < 1e-8 and abs(eig[0]["im"] - 0.6) < 1e-8

    r = run("spectrum", "--config", DATA / "one_mode_m1.json", "--sector", 0, "--rmin", 0.5)
    assert r.returncode == 3
    assert "PoleOnContour" in r.stderr


def test_roundtrip_and_invert(tmp_path):
    r = run("roundtrip", "--config", DATA / "zero_m1.json")
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["report"]["max_error"] == 0.0

    out = tmp_path / "rt.json"
    r = run("roundtrip", "--config", DATA / "roundtrip_m1.json", "--out", out)
    assert r.returncode == 0, r.stderr
    assert "max error" in r.stdout
    assert json.loads(out.read_text())["report"]["max_error"] <= 1e-6

    sc = tmp_path / "sc.json"
    assert run("scattering", "--config", DATA / "roundtrip_m1.json", "--out", sc).returncode == 0
    data = json.loads(sc.read_text())["data"]
    good = tmp_path / "good.json"
    good.write_text(json.dumps(data))
    r = run("invert", "--normalizers", good)
    assert r.returncode == 0, r.stderr

    data["normalizers"][2]["re"] *= 1.1
    data["normalizers"][2]["im"] *= 1.1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    r = run("invert", "--normalizers", bad)
    assert r.returncode == 4
    assert "InconsistentData" in r.stderr


def test_verify_csv(tmp_path):
    csv = tmp_path / "v.csv"
    r = run("verify", "--config", DATA / "random_m2.json", "--csv", csv)
    assert r.returncode == 0, r.stderr
    assert json.loads(r.stdout)["max_residual"] < 1e-8
    lines = csv.read_text().splitlines()
    assert lines[0].startswith("k_re,k_im,tau,x")
    assert len(lines) > 1


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run("spectrum", "--config", DATA / "strong_coupling_m1.json", "--seed", 3, "--out", out).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_log_level():
    env = dict(os.environ, PENCIL_LOG="info")
    r = run("forward", "--config", DATA / "zero_m1.json", "--truncation", 2, env=env)
    assert "[info]" in r.stderr
