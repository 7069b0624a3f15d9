import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from circle_euler.cli import main

CHECKER = Path(__file__).with_name("certificate_checker.py")


def run(*argv):
    return main([str(a) for a in argv])


# -- check --------------------------------------------------------------------------------

def test_check_dp_not_realizable(tmp_path, capsys):
    out = tmp_path / "b3.json"
    assert run("check", "--b", "3", "--out", out) == 3
    cert = json.loads(out.read_text())
    w = cert["witness"]
    assert (w["kind"], w["n"], w["lhs"], w["rhs"], w["census"]) == ("eigenrelation-failure", 1, "20", "80/3", [])
    assert "not-realizable" in capsys.readouterr().out


def test_check_ch_realizable(capsys):
    assert run("check", "--b", "2") == 0
    cert = json.loads(capsys.readouterr().out)
    assert cert["verdict"] == "realizable"
    assert cert["witness"]["table"][3] == [3, "10"]


@pytest.mark.parametrize("bad", [["check", "--b", "0.5"], ["check", "--b", "1/0"], ["check"], ["nosuch"]])
def test_config_errors_exit_1(bad):
    assert run(*bad) == 1


def test_invalid_candidate_exits_4(tmp_path, capsys):
    cand = tmp_path / "cand.json"
    cand.write_text(json.dumps({
        "kind": "perturbed", "N": 1,
        "entries": [[0, 0, "1", "0"], [1, 0, "1/2", "0"], [-1, 0, "1/2", "0"], [0, 1, "1/2", "0"],
                    [0, -1, "1/2", "0"], [1, 1, "2", "0"], [-1, -1, "2", "0"]],
    }))
    assert run("check", "--b", "2", "--candidate", cand) == 4
    assert json.loads(capsys.readouterr().out)["witness_mode"] == 1


def test_valid_candidate_is_reported(tmp_path, capsys):
    cand = tmp_path / "cand.json"
    cand.write_text(json.dumps({"kind": "multiplier", "rule": "helmholtz", "scale": "3"}))
    assert run("check", "--b", "2", "--candidate", cand) == 0
    report = json.loads(capsys.readouterr().out)["candidate"]
    assert all(report["residual_zero_on"].values())


# -- scan ------------------------------------------------------------------------------------

def test_scan_small_list(tmp_path):
    bfile = tmp_path / "b.txt"
    bfile.write_text("0\n1/2  # half\n1\n2\n3\n-4\n")
    out, certs = tmp_path / "scan.csv", tmp_path / "certs"
    certs.mkdir()
    assert run("scan", "--b-file", bfile, "--out", out, "--cert-dir", certs) == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert [r["b"] for r in rows] == ["0", "1/2", "1", "2", "3", "-4"]
    assert [r["verdict"] == "realizable" for r in rows] == [False, False, False, True, False, False]
    for r in rows:
        assert (r["witness_kind"] == "" and r["witness_detail"] == "") == (r["b"] == "2")
    assert rows[-1]["witness_kind"] == "gamma-contradiction"
    files = sorted(certs.glob("*.json"))
    assert len(files) == 6
    proc = subprocess.run([sys.executable, CHECKER, *files], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout


def test_scan_singleton_json_list(tmp_path, capsys):
    bfile = tmp_path / "b.json"
    bfile.write_text('["2"]')
    assert run("scan", "--b-file", bfile) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["b,verdict,witness_kind,witness_detail", "2,realizable,,"]


def test_scan_empty_file_is_config_error(tmp_path):
    bfile = tmp_path / "b.txt"
    bfile.write_text("# nothing\n")
    assert run("scan", "--b-file", bfile) == 1


def test_checker_rejects_tampered_file(tmp_path):
    out = tmp_path / "c.json"
    run("check", "--b", "3", "--out", out)
    obj = json.loads(out.read_text())
    obj["witness"]["lhs"] = "21"
    out.write_text(json.dumps(obj))
    assert subprocess.run([sys.executable, CHECKER, out], capture_output=True).returncode == 1


# -- simulate ----------------------------------------------------------------------------------

def test_simulate_ch_preset(tmp_path):
    out = tmp_path / "ch.csv"
    assert run("simulate", "--preset", "ch", "--u0", "sin", "--t-end", "1", "--out", out) == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    t = [float(r["t"]) for r in rows]
    e = [float(r["energy"]) for r in rows]
    assert all(a < b for a, b in zip(t, t[1:])) and t[-1] == 1.0
    assert max(abs(x - e[0]) for x in e) / e[0] < 1e-8
    final = json.loads((tmp_path / "ch.csv.final.json").read_text())
    assert final["N"] == 64


def test_simulate_from_config_file_with_override(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "system": {"inertia": {"kind": "multiplier", "rule": "identity"}, "form": "euler-christoffel"},
        "initial": "sin", "dt": 1e-3, "t_end": 1.0, "N": 256, "blowup_slope_threshold": 50,
    }))
    out = tmp_path / "burgers.csv"
    assert run("simulate", "--config", cfg, "--t-end", "0.5", "--out", out) == 0
    last = out.read_text().splitlines()[-1].split(",")
    assert float(last[2]) > 50
    assert abs(float(last[0]) - 1 / 3) < 0.02


def test_simulate_dp_preset_table_profile(tmp_path):
    out = tmp_path / "dp.csv"
    table = '[[1, "0", "-1/4"], [-1, "0", "1/4"], [0, "1/10", "0"]]'
    assert run("simulate", "--preset", "dp", "--u0", table, "--t-end", "0.05", "--dt", "0.01", "--n", "16", "--out", out) == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate"],
        ["simulate", "--preset", "ch", "--u0", "tanh"],
        ["simulate", "--preset", "ch", "--dt", "-1"],
        ["simulate", "--preset", "ch", "--n", "0", "--u0", "cos"],
        ["simulate", "--config", "/nonexistent/run.json"],
        ["shock-verify", "--c", "-1"],
        ["shock-verify", "--resolution", "100"],
    ],
)
def test_simulate_and_shock_config_errors(argv):
    assert run(*argv) == 1


def test_simulate_step_rejected_exits_2(tmp_path):
    out = tmp_path / "x.csv"
    code = run("simulate", "--preset", "burgers", "--u0", "[[1, 0, -1e300], [-1, 0, 1e300]]",
               "--dt", "0.5", "--t-end", "1", "--n", "4", "--threshold", "inf", "--out", out)
    assert code == 2


# -- shock-verify --------------------------------------------------------------------------------

def test_shock_verify(capsys):
    assert run("shock-verify", "--c", "1", "--resolution", "256") == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["resolutions"] == [256, 512, 1024]
    assert abs(obj["order_estimate"] - 2) < 0.3
    assert obj["residuals"][-1] < 1e-6
    assert abs(obj["rh_discrepancy"]) < 1e-12
    assert "weak_form" in obj


# -- determinism and entry point -----------------------------------------------------------------------

def test_outputs_are_byte_identical(tmp_path):
    for i in (1, 2):
        run("check", "--b", "-10", "--out", tmp_path / f"c{i}.json")
        run("simulate", "--preset", "ch", "--t-end", "0.1", "--out", tmp_path / f"s{i}.csv")
        run("shock-verify", "--out", tmp_path / f"k{i}.json")
    for stem, ext in (("c", "json"), ("s", "csv"), ("s", "csv.final.json"), ("k", "json")):
        assert (tmp_path / f"{stem}1.{ext}").read_bytes() == (tmp_path / f"{stem}2.{ext}").read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "circle_euler", "check", "--b", "3"], capture_output=True, text=True)
    assert proc.returncode == 3
    assert json.loads(proc.stdout)["witness"]["kind"] == "eigenrelation-failure"
