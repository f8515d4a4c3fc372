import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from spinorder.cli import main


def run(tmp_path, *args, sub="out"):
    out = tmp_path / sub
    code = main([*args, "--out-dir", str(out)])
    return code, out


def load(path):
    return json.loads(path.read_text())


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_analyze_ghz(tmp_path, capsys):
    code, out = run(tmp_path, "analyze", "--state", "ghz", "--sites", "12")
    assert code == 0
    doc = load(out / "report.json")
    assert doc["schema_version"] == "1.0" and doc["command"] == "analyze"
    assert doc["block_size"] == 1
    op = np.array(doc["diagonal"]["operator"]["real"])
    np.testing.assert_allclose(np.abs(op), np.eye(2), atol=1e-12)
    assert doc["modes"]["diagonal"]["k"] == 0.0
    assert doc["modes"]["diagonal"]["wavelength"] is None
    assert doc["thresholds"]["mi_threshold"] == 1e-3
    assert {p.name for p in out.iterdir()} >= {"report.json", "mi_table.csv", "correlations.csv", "spectrum.csv", "modes.csv"}
    assert "verdict: long-range order" in capsys.readouterr().out


def test_analyze_dimer(tmp_path):
    code, out = run(tmp_path, "analyze", "--state", "dimer", "--sites", "16")
    assert code == 0
    doc = load(out / "report.json")
    assert doc["block_size"] == 2
    assert doc["modes"]["diagonal"]["k_over_pi"] == pytest.approx(1.0)
    w = doc["diagonal"]["weights"]
    assert w[0] < 0 and max(abs(x) for x in w) == pytest.approx(1.0)


def test_analyze_heisenberg(tmp_path):
    code, out = run(tmp_path, "analyze", "--model", "heisenberg", "--sites", "16", "--seed", "7")
    assert code == 0
    doc = load(out / "report.json")
    assert doc["input"]["ground_state"]["residual"] <= 1e-10
    assert doc["verdict"]["classification"] == "long-range correlation (algebraic decay)"
    assert doc["offdiagonal"]["found"]
    for mode in doc["modes"].values():
        assert mode["k_over_pi"] == pytest.approx(1.0)
    assert doc["conventions"]["hamiltonian"].startswith("spin operators")


def test_analyze_no_order_exit_code(tmp_path):
    code, out = run(tmp_path, "analyze", "--state", "up", "--sites", "8")
    assert code == 2
    doc = load(out / "report.json")
    assert doc["block_size"] is None and not doc["verdict"]["order_found"]


def test_mi_scan_tables(tmp_path):
    code, out = run(tmp_path, "mi-scan", "--state", "dimer", "--sites", "16")
    assert code == 0
    rows = read_csv(out / "mi_table.csv")
    assert rows[0] == ["m", "r", "mi", "log10_r", "log10_mi"]
    table = {(int(m), int(r)): float(v) for m, r, v, *_ in rows[1:]}
    assert all(table[(1, r)] < 1e-2 for r in range(2, 9))
    assert all(abs(table[(2, r)] - 0.2690) < 0.02 for r in (4, 6, 8))
    # numbers carry 17 significant digits
    assert len(rows[1][2].replace(".", "").lstrip("0").split("e")[0]) >= 15
    code, out = run(tmp_path, "mi-scan", "--state", "up", "--sites", "8", sub="up")
    assert code == 2
    assert all(float(r[2]) < 1e-12 for r in read_csv(out / "mi_table.csv")[1:])
    code, out = run(tmp_path, "mi-scan", "--state", "ghz", "--sites", "12", "--max-block", "1", "--format", "json", sub="g")
    doc = load(out / "mi_scan.json")
    np.testing.assert_allclose(doc["mi_scan"]["rows"][0]["values"], 1.0, atol=1e-10)
    assert not (out / "mi_table.csv").exists()


def test_correlate(tmp_path):
    code, out = run(tmp_path, "correlate", "--state", "ghz", "--sites", "12", "--operator", "sigma_z")
    assert code == 0
    rows = read_csv(out / "correlation.csv")
    assert rows[0] == ["r", "C(r)", "full"]
    np.testing.assert_allclose([float(r[1]) for r in rows[1:]], 1.0, atol=1e-12)
    assert load(out / "correlation.json")["mode"]["k"] == 0.0
    # GHZ transverse correlations vanish (blocks traced out of a cat state)
    code, out = run(tmp_path, "correlate", "--state", "ghz", "--sites", "12", "--operator", "sigma_x", sub="x")
    assert code == 2
    np.testing.assert_allclose([float(r[1]) for r in read_csv(out / "correlation.csv")[1:]], 0.0, atol=1e-12)


def test_correlate_heisenberg_sigma_z(tmp_path):
    code, out = run(tmp_path, "correlate", "--model", "heisenberg", "--sites", "12", "--operator", "sigma_z")
    assert code == 0
    c = [float(r[1]) for r in read_csv(out / "correlation.csv")[1:]]
    assert all(np.sign(c[i]) == (-1) ** (i + 1) for i in range(len(c)))
    assert all(abs(c[i]) > abs(c[i + 1]) for i in range(3))


def test_correlate_rejects_non_hermitian(tmp_path, capsys):
    bad = json.dumps({"real": [[0, 1], [0, 0]]})
    code, _ = run(tmp_path, "correlate", "--state", "ghz", "--sites", "6", "--operator", bad)
    assert code == 1
    assert "not Hermitian" in capsys.readouterr().err


def test_operator_roundtrip_reproduces_tables(tmp_path):
    code, out = run(tmp_path, "analyze", "--model", "heisenberg", "--sites", "12")
    assert code == 0
    doc = load(out / "report.json")
    for label in ("diagonal", "offdiagonal_x", "offdiagonal_y"):
        c2, out2 = run(tmp_path, "correlate", "--model", "heisenberg", "--sites", "12",
                       "--operator", str(out / f"operator_{label}.json"), sub=label)
        assert c2 == 0
        again = load(out2 / "correlation.json")["correlation"]
        assert again["distances"] == doc["correlations"][label]["distances"]
        np.testing.assert_allclose(again["connected"], doc["correlations"][label]["connected"], atol=1e-12, rtol=0)


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"state": "ghz", "sites": 8, "mi-threshold": 0.5, "max_block": 2}))
    code, out = run(tmp_path, "mi-scan", "--config", str(cfg), "--max-block", "1")
    assert code == 0
    th = load(out / "mi_scan.json")["thresholds"]
    assert th["mi_threshold"] == 0.5 and th["max_block"] == 1
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(tmp_path, "mi-scan", "--config", str(cfg))[0] == 1


def test_model_json_and_npy_inputs(tmp_path):
    model = tmp_path / "model.json"
    model.write_text(json.dumps({"n_sites": 8, "bonds": [[i, (i + 1) % 8, 1, 1, 1] for i in range(8)]}))
    code, out = run(tmp_path, "mi-scan", "--model", str(model))
    assert code == 0
    doc = load(out / "mi_scan.json")
    assert doc["input"]["ground_state"]["energy"] == pytest.approx(-3.651093408937174, abs=1e-8)
    npy = tmp_path / "psi.npy"
    psi = np.zeros(64)
    psi[0] = psi[-1] = 2**-0.5
    np.save(npy, psi)
    code, out = run(tmp_path, "analyze", "--state", str(npy), sub="npy")
    assert code == 0 and load(out / "report.json")["block_size"] == 1


@pytest.mark.parametrize(
    "args",
    [
        ["analyze", "--state", "ghz"],
        ["analyze", "--state", "ghz", "--model", "heisenberg", "--sites", "4"],
        ["analyze"],
        ["analyze", "--state", "zigzag", "--sites", "4"],
        ["analyze", "--state", "dimer", "--sites", "7"],
        ["correlate", "--state", "ghz", "--sites", "6"],
        ["correlate", "--state", "ghz", "--sites", "6", "--operator", "sigma_q"],
        ["analyze", "--model", "heisenberg", "--sites", "30"],
        ["analyze", "--model", "heisenberg", "--sites", "8", "--tol", "1e-20"],
        ["analyze", "--config", "/nonexistent/cfg.json"],
    ],
)
def test_errors_exit_one(tmp_path, args):
    assert run(tmp_path, *args)[0] == 1


def test_deterministic_reports(tmp_path):
    args = ["analyze", "--model", "heisenberg", "--sites", "12", "--seed", "5"]
    _, a = run(tmp_path, *args, sub="a")
    _, b = run(tmp_path, *args, sub="b")
    for name in ("report.json", "correlations.csv", "mi_table.csv", "modes.csv", "spectrum.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "spinorder", "mi-scan", "--state", "ghz", "--sites", "6", "--out-dir", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and "block size: 1" in res.stdout
