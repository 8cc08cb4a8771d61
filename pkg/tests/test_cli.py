import csv
import io
import json
from contextlib import redirect_stdout

import pytest

from eventchains import StateIndex, lambda_set, validate_config
from eventchains.cli import EXIT_COMPARE, EXIT_ERROR, EXIT_OK, EXIT_USAGE, main


def run_cli(*argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def test_analyze_csv_and_json_agree(tmp_path):
    code, csv_text = run_cli("analyze", "-n", "2", "--theta", "1e-3")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(csv_text)))
    assert len(rows) == 1
    code, json_text = run_cli("analyze", "-n", "2", "--theta", "1e-3", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(json_text)
    row = rows[0]
    assert int(row["n"]) == data["n"] == 2
    assert float(row["coverage"]) == pytest.approx(data["coverage"], abs=1e-6)
    assert float(row["r_pct"]) == pytest.approx(data["delivery_ratio_pct"], abs=1e-4)
    assert float(row["l_ms"]) == pytest.approx(data["latency_ms"], abs=1e-4)
    assert int(row["chains"]) == data["chains"]


def test_analyze_outputs_to_files(tmp_path):
    out = tmp_path / "row.csv"
    pdf = tmp_path / "pdf.csv"
    dump = tmp_path / "chains.txt"
    code, _ = run_cli("analyze", "-n", "2", "--theta", "1e-3",
                      "--out", str(out), "--pdf-out", str(pdf),
                      "--dump-chains", str(dump))
    assert code == EXIT_OK
    assert out.read_text().startswith("n,theta,coverage")
    pdf_rows = list(csv.DictReader(pdf.open()))
    assert pdf_rows and all(float(r["p"]) > 0 for r in pdf_rows)
    for line in dump.read_text().splitlines():
        assert line.startswith("p=") and line.endswith("]")


def test_config_file_and_override_precedence(tmp_path):
    cfg = tmp_path / "net.cfg"
    cfg.write_text("n_nodes = 5\ntheta = 1e-2\nmac_min_be = 2\n")
    # --set overrides the file, flags override everything
    code, text = run_cli("analyze", "--config", str(cfg), "--set", "theta=5e-2",
                         "--nodes", "2", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(text)
    assert data["n"] == 2 and data["theta"] == 5e-2


def test_simulate_json(tmp_path):
    code, text = run_cli("simulate", "-n", "2", "--runs", "5000", "--seed", "3",
                         "--format", "json")
    assert code == EXIT_OK
    data = json.loads(text)
    assert data["chains"] == 5000
    assert 60 < data["delivery_ratio_pct"] < 100


def test_enumerate_masses():
    code, text = run_cli("enumerate", "-n", "1")
    assert code == EXIT_OK
    lines = text.strip().splitlines()
    assert len(lines) == 9
    assert lines[-1].startswith("#") and "total_mass=1.0" in lines[-1]


def test_debug_lambda_matches_schedule():
    code, text = run_cli("debug", "lambda", "2", "1", "-n", "2")
    assert code == EXIT_OK
    m = validate_config({"n_nodes": 2})
    assert tuple(int(x) for x in text.split()) == lambda_set(m, StateIndex(2, 1))


def test_sweep_min_backoff_window(tmp_path):
    out = tmp_path / "sweep.csv"
    code, _ = run_cli("sweep", "--param", "mac_min_be", "--from", "1", "--to", "3",
                      "--nodes", "3", "--theta", "1e-4", "--out", str(out))
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [r["mac_min_be"] for r in rows] == ["1.0", "2.0", "3.0"]
    ratios = [float(r["r_pct"]) for r in rows]
    assert ratios[0] < ratios[1] < ratios[2]  # wider first window, fewer collisions


def test_compare_small_network_agrees():
    # the model is exact for two nodes with tiny windows, so analysis and
    # simulation may differ only by sampling noise
    code, text = run_cli("compare", "--nodes", "2", "--runs", "30000", "--seed", "1",
                         "--set", "mac_min_be=1", "--set", "mac_max_be=2",
                         "--set", "mac_max_csma_backoffs=1",
                         "--set", "mac_max_frame_retries=1", "--sigma", "4")
    assert code == EXIT_OK, text
    assert "DISAGREE" not in text


def test_exit_codes():
    code, _ = run_cli("analyze")  # missing n_nodes
    assert code == EXIT_ERROR
    code, _ = run_cli("analyze", "-n", "0")
    assert code == EXIT_ERROR
    code, _ = run_cli("bogus-subcommand")
    assert code == EXIT_USAGE
    code, _ = run_cli("enumerate", "-n", "10")  # tree too large
    assert code == EXIT_ERROR
    code, _ = run_cli("compare", "--nodes", "3", "--runs", "20000", "--seed", "2",
                      "--sigma", "0.0001")
    assert code == EXIT_COMPARE


def test_workers_env_default(monkeypatch):
    monkeypatch.setenv("ECC_WORKERS", "2")
    code, text = run_cli("analyze", "-n", "2", "--theta", "1e-3", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(text)["chains"] > 0
