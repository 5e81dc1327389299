from __future__ import annotations

import csv
import hashlib
import json
import shutil
from pathlib import Path

import pytest

from conftest import TWO_PHASE
from phasehelfrich.cli import main, run

SCEN = Path(__file__).resolve().parents[1] / "scenarios"


def small(tmp_path, data=None, n=24):
    d = dict(data or TWO_PHASE, grid={"n": n})
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(d))
    return p


def manifest(out: Path) -> dict:
    return json.loads((out / "manifest.json").read_text())


def test_energy_command(tmp_path, capsys):
    out = tmp_path / "o"
    assert run("energy", SCEN / "flat_disc.json", ["--out", str(out)]) == 0
    e = json.loads((out / "energy.json").read_text())
    assert e["bulk0"] == pytest.approx(0.785398, rel=1e-3)
    assert e["line"] == pytest.approx(0.1 * 3.141592653589793, rel=1e-6)
    assert "total" in capsys.readouterr().out
    m = manifest(out)
    assert m["exit_status"] == 0 and m["command"] == "energy"
    assert m["scenario_sha256"] == hashlib.sha256((SCEN / "flat_disc.json").read_bytes()).hexdigest()
    for name, digest in m["files"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest


def test_missing_field_exit_code(tmp_path, capsys):
    assert run("energy", SCEN / "missing_sigma.json", ["--out", str(tmp_path / "o")]) == 1
    assert "sigma" in capsys.readouterr().err


def test_variation_and_distance_checks(tmp_path):
    p = small(tmp_path)
    out = tmp_path / "v"
    assert run("variation-check", p, ["--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "variation_check.csv").open()))
    assert rows and all(float(r["rel_err"]) < 1e-6 for r in rows)
    out = tmp_path / "d"
    assert run("distance-check", p, ["--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "distance_check.csv").open()))
    assert rows and max(float(r["err"]) for r in rows) < 1e-6


def test_minimize_and_strict_exit(tmp_path):
    p = small(tmp_path)
    out = tmp_path / "m"
    assert main(["minimize", str(p), "--out", str(out)]) == 0
    assert (out / "field.csv").exists()
    rep = json.loads((out / "report.json").read_text())
    assert rep["converged"]
    d = dict(TWO_PHASE, grid={"n": 24}, solver={"max_iters": 0})
    assert main(["minimize", str(small(tmp_path, d)), "--out", str(tmp_path / "s"), "--strict"]) == 2
    assert manifest(tmp_path / "s")["exit_status"] == 2


def test_verify_and_refine(tmp_path):
    p = small(tmp_path)
    out = tmp_path / "ver"
    assert run("verify", p, ["--out", str(out)]) == 0
    assert (out / "residuals.csv").exists()
    out = tmp_path / "ref"
    assert run("refine", p, ["--out", str(out), "--levels", "16", "24"]) == 0
    rows = list(csv.reader((out / "refinement.csv").open()))
    assert len(rows) == 3
    assert (out / "residuals_n16.csv").exists() and (out / "residuals_n24.csv").exists()


def test_default_output_directory(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    shutil.copy(SCEN / "flat_disc.json", tmp_path / "flat.json")
    assert main(["energy", "flat.json"]) == 0
    assert (tmp_path / "out" / "flat_disc-energy" / "manifest.json").exists()
