import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from nlpot.cli import main

ROOT = Path(__file__).resolve().parents[1]


def write(tmp_path, cfg, name="scenario.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg), encoding="utf-8")
    return p


def report(outdir):
    return json.loads((outdir / "report.json").read_text())


def test_exponents_json(tmp_path, capsys):
    out = tmp_path / "exp"
    assert main(["exponents", str(ROOT / "scenarios" / "exponents_energy.yaml"), "--out", str(out)]) == 0
    ex = report(out)["exponents"]
    assert ex["gamma"]["exact"] == "1" and ex["s_embed"]["exact"] == "3" and ex["s1"]["exact"] == "4/3"
    assert "gamma" in capsys.readouterr().out
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["exit_status"] == 0 and meta["output"] == str(out)


def test_exponents_trivial_is_reported_not_failed(tmp_path):
    cfg = {"name": "t", "params": {"n": 3, "p": 2, "q": "1/2", "r": 3}}
    out = tmp_path / "o"
    assert main(["exponents", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    assert report(out)["verdict"]["verdict"] == "trivial-regime"


@pytest.mark.parametrize("cfg", [
    {"name": "x", "params": {"n": 3, "p": 2}, "bogus": 1},
    {"name": "x", "params": {"n": 3, "p": 2, "q": "1/2", "r": 6}, "measure": {"type": "uniform_box", "lo": [0, 0, 0]}},
    {"params": {"n": 3, "p": 2}},
], ids=["unknown-key", "incomplete-measure", "missing-name"])
def test_schema_violations_exit_2(tmp_path, cfg, capsys):
    assert main(["solve", str(write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 2
    assert "schema violation" in capsys.readouterr().err


def test_missing_config_and_trivial_regime_exit_2(tmp_path):
    assert main(["solve", str(tmp_path / "nope.yaml")]) == 2
    assert main(["solve", str(ROOT / "scenarios" / "trivial_regime.yaml"), "--out", str(tmp_path / "t")]) == 2


def test_atomic_solve_and_bad_points_exit_2(tmp_path):
    atoms = {"type": "atoms", "points": [[0, 0, 0]], "masses": [1.0]}
    cfg = {"name": "a", "params": {"n": 3, "p": 2, "q": "1/2", "r": 6}, "measure": atoms}
    assert main(["solve", str(write(tmp_path, cfg)), "--out", str(tmp_path / "a")]) == 2
    cfg["points"] = {"type": "list", "values": [[0, 0]]}
    assert main(["potential", str(write(tmp_path, cfg)), "--out", str(tmp_path / "b")]) == 2


def test_unknown_check_exit_2(tmp_path):
    assert main(["verify", "--check", "nope", "--out", str(tmp_path / "v")]) == 2


def test_potential_atomic_point_mass(tmp_path):
    cfg = {
        "name": "pm",
        "params": {"n": 3, "p": 2},
        "measure": {"type": "atoms", "points": [[0, 0, 0]], "masses": [2.0]},
        "points": {"type": "list", "values": [[2, 0, 0], [0, 0, 0]]},
        "target": "wolff",
    }
    out = tmp_path / "pm"
    assert main(["potential", str(write(tmp_path, cfg)), "--out", str(out)]) == 0
    rows = (out / "potential.csv").read_text().splitlines()
    assert rows[0] == "x0,x1,x2,value,error"
    # W_{1,2} of 2δ_0 at distance 2 is 2/2 = 1; the atom itself gives +inf
    assert float(rows[1].split(",")[3]) == pytest.approx(1.0, rel=1e-6)
    assert rows[2].split(",")[3] == "inf"
    assert report(out)["finite"] == 1


def test_manufacture_then_solve_recovers_fixture(tmp_path):
    cfg = {
        "name": "mf",
        "params": {"n": 3, "p": 2, "q": "1/2", "r": 6},
        "kernel": {"type": "green_half_space"},
        "manufacture": {"rho": {"type": "uniform_box", "lo": [-0.5, -0.5, 0.25], "hi": [0.5, 0.5, 1.25], "cells": 4}},
        "solver": {"tol": 1e-10},
    }
    mdir = tmp_path / "m"
    assert main(["manufacture", str(write(tmp_path, cfg)), "--out", str(mdir)]) == 0
    for f in ("sigma.npz", "u_star.csv", "scenario.yaml", "report.json", "metadata.json"):
        assert (mdir / f).exists()
    sdir = tmp_path / "s"
    assert main(["solve", str(mdir / "scenario.yaml"), "--out", str(sdir)]) == 0
    rep = report(sdir)
    assert rep["solve"]["converged"]
    # the center rule makes u* an exact fixed point of the discrete map
    assert rep["reference_error"] < 1e-8


def test_solve_non_convergence_exits_1(tmp_path):
    cfg = {
        "name": "nc",
        "params": {"n": 3, "p": 2, "q": "1/2", "r": 6},
        # on a 2^3 grid the potential is constant at the nodes and the seed is already exact
        "measure": {"type": "uniform_box", "lo": [0, 0, 0], "hi": [1, 1, 1], "cells": 3},
        "solver": {"tol": 1e-15, "max_iter": 2},
    }
    assert main(["solve", str(write(tmp_path, cfg)), "--out", str(tmp_path / "nc")]) == 1


def test_relative_output_resolves_against_config(tmp_path):
    cfg = {"name": "rel", "output": "results", "params": {"n": 3, "p": 2, "q": "1/2", "r": 6}}
    assert main(["exponents", str(write(tmp_path, cfg))]) == 0
    assert (tmp_path / "results" / "report.json").exists()
    assert "output" not in report(tmp_path / "results")["config"]


@pytest.mark.parametrize("path", sorted((ROOT / "scenarios").glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_scenarios_validate(path):
    from nlpot.cli import load_config

    assert load_config(path)["name"]
