"""Command-line plumbing: grids, CSV contracts, exit codes, reproducibility."""

from __future__ import annotations

import csv
import json
import math
import subprocess
import sys

import pytest

from qnetgec import cli


def read_csv(path):
    comments, rows = [], []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line.rstrip("\n"))
            else:
                rows.append(line)
    parsed = list(csv.DictReader(rows))
    return comments, parsed


def test_parse_grid_forms():
    assert cli.parse_grid("0.11") == [0.11]
    assert cli.parse_grid("0.1,0.2") == [0.1, 0.2]
    assert cli.parse_grid("0:0.2:0.05") == [0.0, 0.05, 0.1, 0.15, 0.2]
    assert cli.parse_grid("0.5,0.8:1.0:0.1") == [0.5, 0.8, 0.9, 1.0]
    with pytest.raises(ValueError):
        cli.parse_grid("0:1")
    with pytest.raises(ValueError):
        cli.parse_grid("0:1:-0.5")
    with pytest.raises(ValueError):
        cli.parse_grid("")


def test_parse_policy_forms():
    assert cli.parse_policy("random") == "random"
    assert cli.parse_policy("core") == "core"
    assert cli.parse_policy("fixed:3,17") == ("fixed", 3, 17)
    with pytest.raises(ValueError):
        cli.parse_policy("fixed:3")
    with pytest.raises(ValueError):
        cli.parse_policy("nearest")


def test_lattice_json_to_file(tmp_path):
    out = tmp_path / "lat.json"
    assert cli.main(["lattice", "--geometry", "square", "--L", "5",
                     "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["nodes"]) == 25
    assert len(doc["bonds"]) == 40


def test_lattice_triangular_bond_count(tmp_path):
    out = tmp_path / "lat.json"
    assert cli.main(["lattice", "--geometry", "triangular", "--L", "5",
                     "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["bonds"]) == 56


def test_invalid_geometry_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["lattice", "--geometry", "kagome", "--L", "5"])
    assert exc.value.code == 2


def test_runtime_error_exit_code(tmp_path):
    code = cli.main(["gec-sweep", "--geometry", "square", "--L", "1",
                     "--px", "0", "--trials", "5",
                     "--out", str(tmp_path / "x.csv")])
    assert code == 3


def test_gec_sweep_csv_contract(tmp_path):
    out = tmp_path / "gec.csv"
    assert cli.main([
        "gec-sweep", "--geometry", "square", "--L", "5", "--px", "0,0.05",
        "--trials", "80", "--seed", "9", "--out", str(out),
    ]) == 0
    comments, rows = read_csv(out)
    assert comments[0].startswith("# qnetgec ")
    assert comments[1].startswith("# config: ")
    assert comments[2] == "# seed: 9"
    cfg = json.loads(comments[1][len("# config: "):])
    assert cfg["subcommand"] == "gec-sweep"
    assert "workers" not in cfg
    assert len(rows) == 2
    assert rows[0]["p_x"] == "0.0"
    assert float(rows[0]["fidelity"]) == 1.0
    assert int(rows[0]["void_trials"]) == 0
    assert 0.0 <= float(rows[1]["mean_success"]) <= 1.0
    for col in ("geometry", "L", "P_c", "p_x", "p_z", "trials", "void_trials",
                "mean_success", "se", "mean_defects", "mean_match_weight",
                "mean_minority", "mean_success_indep", "fidelity",
                "void_warning", "seed"):
        assert col in rows[0]


def test_gec_sweep_void_warning(tmp_path):
    out = tmp_path / "void.csv"
    assert cli.main([
        "gec-sweep", "--geometry", "square", "--L", "5", "--px", "0.01",
        "--Pc", "0.01", "--trials", "40", "--seed", "3", "--out", str(out),
    ]) == 0
    _, rows = read_csv(out)
    assert int(rows[0]["void_trials"]) > 20
    assert rows[0]["void_warning"] == "1"


def test_worker_count_does_not_change_bytes(tmp_path):
    args = ["gec-sweep", "--geometry", "square", "--L", "6",
            "--px", "0.0,0.06", "--trials", "256", "--seed", "41"]
    paths = []
    for w in (1, 4):
        p = tmp_path / f"w{w}.csv"
        assert cli.main(args + ["--workers", str(w), "--out", str(p)]) == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]


def test_phi_psi_csv(tmp_path):
    out = tmp_path / "pp.csv"
    assert cli.main([
        "phi-psi", "--geometry", "square,triangular", "--L", "8",
        "--Pc", "1", "--trials", "30", "--seed", "2", "--out", str(out),
    ]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 2
    for row in rows:
        assert float(row["phi"]) == 1.0
        assert float(row["psi"]) == 1.0


def test_perc_sweep_flags_match_closed_form(tmp_path):
    out = tmp_path / "grid.csv"
    assert cli.main([
        "perc-sweep", "--L", "6", "--Pc", "0.4,0.8", "--pxprime", "0,0.2",
        "--trials", "40", "--seed", "5", "--out", str(out),
    ]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 4
    from qnetgec import analysis
    for row in rows:
        want = analysis.in_critical_region(
            float(row["P_c"]), float(row["p_x_prime"]))
        assert row["in_critical_region"] == str(int(want))


def test_threshold_table(tmp_path):
    out = tmp_path / "th.csv"
    assert cli.main([
        "threshold", "--geometry", "square,triangular", "--Pc", "0.4,1",
        "--out", str(out),
    ]) == 0
    _, rows = read_csv(out)
    by_key = {(r["geometry"], r["P_c"]): r for r in rows}
    assert math.isnan(float(by_key[("square", "0.4")]["p_star"]))
    assert abs(float(by_key[("square", "1.0")]["p_star"]) - 0.110028) < 1e-4
    assert abs(float(by_key[("triangular", "1.0")]["p_star"]) - 0.173952) < 1e-4


def test_pure_sweep_rows(tmp_path):
    out = tmp_path / "pure.csv"
    assert cli.main([
        "pure-sweep", "--alpha", "0.8", "--points", "4", "--out", str(out),
    ]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 4
    assert float(rows[0]["alpha_prime"]) == 0.5
    assert float(rows[0]["p_x_prime"]) == 0.0
    assert float(rows[-1]["P_c"]) == 1.0


def test_tradeoff_rows(tmp_path):
    out = tmp_path / "to.csv"
    assert cli.main([
        "tradeoff", "--alpha", "0.75", "--points", "2", "--L", "6",
        "--trials", "60", "--seed", "8", "--out", str(out),
    ]) == 0
    _, rows = read_csv(out)
    assert len(rows) == 2
    for row in rows:
        fom = float(row["F"]) * float(row["phi"]) ** 2
        assert abs(float(row["fom"]) - fom) < 1e-12


def test_css_and_distill_tables(tmp_path):
    out = tmp_path / "css.csv"
    assert cli.main(["css", "--t", "0,1", "--px", "0.01", "--pz", "0.1",
                     "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert float(rows[0]["p_z_eff"]) == 0.1
    assert abs(float(rows[1]["p_z_eff"]) - 0.03) < 1e-12

    out = tmp_path / "distill.csv"
    assert cli.main(["distill", "--lam", "1.0", "--nu", "0", "--m", "2",
                     "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert float(rows[0]["attempt_success"]) == 0.5
    assert float(rows[0]["p_x_prime"]) == 0.0


def test_console_script_stdout():
    proc = subprocess.run(
        [sys.executable, "-m", "qnetgec.cli", "threshold", "--geometry",
         "square", "--Pc", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "0.110027" in proc.stdout


def test_perc_threshold_csv(tmp_path):
    out = tmp_path / "pt.csv"
    assert cli.main([
        "perc-threshold", "--geometry", "square", "--L", "8",
        "--Pc", "0.38:0.62:0.08", "--trials", "200", "--seed", "6",
        "--out", str(out),
    ]) == 0
    _, rows = read_csv(out)
    assert rows[0]["L_small"] == "8" and rows[0]["L_large"] == "16"
    assert 0.38 < float(rows[0]["p_c_star"]) < 0.62
