import csv
import json
import math
import subprocess
import sys
from pathlib import Path

from plate_spectra import PlateConfig
from plate_spectra.weights import make_breve_p, make_uniform, weight_to_json


def run_cli(*args, env=None):
    import os
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run([sys.executable, "-m", "plate_spectra.cli", *args],
                          capture_output=True, text=True, env=full_env)


def read_csv(path: Path):
    with path.open() as fh:
        return list(csv.reader(fh))


def test_spectrum_command(tmp_path):
    proc = run_cli("spectrum", "--out", str(tmp_path), "--n-modes", "12")
    assert proc.returncode == 0, proc.stderr
    rows = read_csv(tmp_path / "table1.csv")
    assert rows[0] == ["m", "mu_m", "nu_m"]
    assert f"{float(rows[1][1]):.2e}" == "9.60e-01"
    assert f"{float(rows[1][2]):.2e}" == "1.09e+04"
    assert f"{float(rows[12][1]):.2e}" == "1.99e+04"
    meta = json.loads((tmp_path / "spectrum_meta.json").read_text())
    assert meta["j0"] == 10
    assert meta["torsional_first_threshold"] == 2734
    assert meta["c0_holds"] is True


def test_spectrum_rejects_bad_config(tmp_path):
    proc = run_cli("spectrum", "--sigma", "0.7", "--out", str(tmp_path))
    assert proc.returncode == 2
    assert "invalid configuration" in proc.stderr


def test_spectrum_rejects_small_truncation(tmp_path):
    proc = run_cli("spectrum", "--n-modes", "5", "--out", str(tmp_path))
    assert proc.returncode == 2


def test_eigs_uniform_echo(tmp_path):
    cfg = PlateConfig()
    wfile = tmp_path / "uniform.json"
    wfile.write_text(weight_to_json(make_uniform(cfg)))
    proc = run_cli("eigs", "--weight", str(wfile), "--n-modes", "12",
                   "--out", str(tmp_path), "--reconstruct", "even", "1",
                   "--grid", "40", "11")
    assert proc.returncode == 0, proc.stderr
    rows = read_csv(tmp_path / "eigenvalues.csv")
    assert rows[0] == ["index", "parity", "value"]
    even = [r for r in rows[1:] if r[1] == "even"]
    odd = [r for r in rows[1:] if r[1] == "odd"]
    assert len(even) == 12 and len(odd) == 12
    assert f"{float(even[0][2]):.2e}" == "9.60e-01"
    assert f"{float(odd[0][2]):.2e}" == "1.09e+04"
    grid = read_csv(tmp_path / "eigenfunction_even_1.csv")
    assert grid[0] == ["x", "y", "value"]
    assert len(grid) == 1 + 40 * 11


def test_eigs_breve_value(tmp_path):
    cfg = PlateConfig()
    wfile = tmp_path / "breve.json"
    wfile.write_text(weight_to_json(make_breve_p(cfg)))
    proc = run_cli("eigs", "--weight", str(wfile), "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    rows = read_csv(tmp_path / "eigenvalues.csv")
    odd = [r for r in rows[1:] if r[1] == "odd"]
    assert f"{float(odd[0][2]):.2e}" == "1.75e+04"


def test_eigs_malformed_json(tmp_path):
    wfile = tmp_path / "bad.json"
    wfile.write_text("{this is not json")
    proc = run_cli("eigs", "--weight", str(wfile), "--out", str(tmp_path))
    assert proc.returncode == 3
    assert "invalid JSON" in proc.stderr


def test_eigs_inadmissible_weight(tmp_path):
    wfile = tmp_path / "bad_mass.json"
    wfile.write_text(json.dumps({
        "variant": "x_bands", "alpha": 0.5, "beta": 1.5,
        "parameters": {"intervals": [[0.5, 1.0]], "inside": 1.5, "outside": 0.5}}))
    proc = run_cli("eigs", "--weight", str(wfile), "--out", str(tmp_path))
    assert proc.returncode == 3
    assert "admissibility" in proc.stderr


def test_optimize_min_mu_1(tmp_path):
    proc = run_cli("optimize", "--target", "min-mu", "--j", "1",
                   "--n-modes", "12", "--grid", "300", "15",
                   "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    meta = json.loads((tmp_path / "optimize_meta.json").read_text())
    assert meta["stop_reason"] == "converged"
    assert meta["final_eigenvalue"] < 0.8
    lines = (tmp_path / "trace.jsonl").read_text().strip().split("\n")
    vals = [json.loads(ln)["eigenvalue"] for ln in lines]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert (tmp_path / "final_weight.json").exists()
    assert (tmp_path / "field.csv").exists()
    assert (tmp_path / "sset.csv").exists()


def test_optimize_sin4_compare(tmp_path):
    proc = run_cli("optimize", "--target", "min-mu", "--j", "5",
                   "--n-modes", "12", "--grid", "300", "15",
                   "--sin4-compare", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    meta = json.loads((tmp_path / "optimize_meta.json").read_text())
    assert abs(meta["sin4_threshold"] - 0.25) < 1e-3
    assert abs(meta["sin4_threshold_exact"] - 0.25) < 1e-12


def test_optimize_max_nu1(tmp_path):
    proc = run_cli("optimize", "--target", "max-nu1", "--n-modes", "20",
                   "--grid", "300", "15", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    meta = json.loads((tmp_path / "optimize_meta.json").read_text())
    assert meta["target"] == "max_nu1"
    assert meta["final_eigenvalue"] > 1.5e4


def test_optimize_non_convergence_exit_code(tmp_path):
    proc = run_cli("optimize", "--target", "min-mu", "--j", "3",
                   "--n-modes", "12", "--grid", "300", "15",
                   "--max-iters", "1", "--out", str(tmp_path))
    assert proc.returncode == 4
    # trace still written
    assert (tmp_path / "trace.jsonl").exists()
    meta = json.loads((tmp_path / "optimize_meta.json").read_text())
    assert meta["stop_reason"] == "max_iters"


def test_ratio_table_weyl_flag(tmp_path):
    proc = run_cli("ratio-table", "--ell", str(math.pi / 2), "--weyl",
                   "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    rows = read_csv(tmp_path / "weyl.csv")
    assert rows[0] == ["h", "lambda_h", "ratio"]
    meta = json.loads((tmp_path / "weyl_meta.json").read_text())
    assert 1 / 1.5 <= meta["median_ratio"] <= 1.5


def test_eigs_bad_reconstruct_parity(tmp_path):
    cfg = PlateConfig()
    wfile = tmp_path / "u.json"
    wfile.write_text(weight_to_json(make_uniform(cfg)))
    proc = run_cli("eigs", "--weight", str(wfile), "--out", str(tmp_path),
                   "--reconstruct", "sideways", "1")
    assert proc.returncode == 2


def test_optimize_j_out_of_range(tmp_path):
    proc = run_cli("optimize", "--target", "min-mu", "--j", "99",
                   "--n-modes", "12", "--out", str(tmp_path))
    assert proc.returncode == 2


def test_rejects_even_grid(tmp_path):
    proc = run_cli("optimize", "--target", "min-mu", "--j", "1",
                   "--grid", "100", "10", "--out", str(tmp_path))
    assert proc.returncode == 2


def test_ratio_table_csv_contract(tmp_path):
    # header and row labels are a stable scripting interface
    proc = run_cli("ratio-table", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stderr
    rows = read_csv(tmp_path / "ratio_table.csv")
    assert rows[0] == ["quantity", "uniform", "pbar10", "pstar", "pbreve",
                       "pdoublebar", "ptilde"]
    labels = [r[0] for r in rows[1:]]
    assert labels == [f"mu_{i}" for i in range(1, 13)] + ["nu_1", "nu_2", "R"]
    for row in rows[1:]:
        for cell in row[1:]:
            float(cell)  # every cell is %.6e-parseable
    dev = read_csv(tmp_path / "ratio_table_deviation.csv")
    assert dev[0] == rows[0]
    # benchmark deviations: 2% everywhere, 5% for the reconstructed cross weight
    for row in dev[1:]:
        for label, cell in zip(rows[0][1:], row[1:]):
            tol = 0.05 if label == "ptilde" else 0.02
            assert float(cell) <= tol, (row[0], label, cell)
