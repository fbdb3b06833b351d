import json
import subprocess
import sys
import time

import pytest

from photocurrent import cli
from photocurrent.currents import branch_current, thermal_current


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_sweep_csv_contract(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", "--gxi2", "1.5", "--sweep", "0:60:31", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "n_mean,J_poisson,J_thermal,J_subpoisson"
    assert len(lines) == 32
    assert lines[1] == "0,0,0,0"
    for line in lines[2:]:
        n, jp, jt, js = map(float, line.split(","))
        assert js >= jp - 1e-9 and jp >= jt - 1e-9
        assert jp == pytest.approx(branch_current(n, 1.5), rel=1e-11)
        assert jt == pytest.approx(thermal_current(n, 1.5), rel=1e-11)
    assert all(len(v.replace("-", "").replace(".", "").lstrip("0")) <= 12
               for line in lines[1:] for v in line.split(",") if "e" not in v)


def test_sweep_gap_smaller_at_larger_ratio(capsys):
    gaps = {}
    for r in ("1.5", "5"):
        code, out, _ = run(["sweep", "--gxi2", r, "--sweep", "0.1:60:60"], capsys)
        rows = [list(map(float, l.split(","))) for l in out.splitlines()[1:]]
        gaps[r] = max(row[3] - row[1] for row in rows)
    assert gaps["5"] < gaps["1.5"]


def test_byte_identical_outputs(tmp_path):
    for argv in (["sweep", "--sweep", "0:10:11", "--workers", "3"],
                 ["simulate", "--nbar", "2", "--kappa", "0.1", "--gamma-ref", "1"],
                 ["verify-bound", "--nbar", "3"],
                 ["current", "--stat", "thermal", "--nbar", "4", "--format", "csv"]):
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(argv + ["--out", str(a)]) == 0
        assert cli.main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
    serial, threaded = tmp_path / "s", tmp_path / "t"
    cli.main(["sweep", "--sweep", "0:10:11", "--out", str(serial)])
    cli.main(["sweep", "--sweep", "0:10:11", "--workers", "4", "--out", str(threaded)])
    assert serial.read_bytes() == threaded.read_bytes()


def test_simulate_json_contract(capsys):
    code, out, _ = run(["simulate", "--nbar", "4", "--gxi2", "1.5"], capsys)
    rec = json.loads(out)
    assert code == 0
    assert set(rec) == {"params", "alpha_sq", "steady", "J_over_gamma", "method"}
    assert set(rec["steady"]) == {"n_a", "n_b", "re_tau", "im_tau"}
    assert rec["J_over_gamma"] == pytest.approx(branch_current(4.0, 1.5), rel=1e-11)
    code, out, _ = run(["simulate", "--nbar", "4", "--method", "density-matrix"], capsys)
    assert json.loads(out)["method"] == "density_matrix"


def test_full_model_requires_gamma_ref(capsys):
    code, _, err = run(["current", "--kappa", "0.1"], capsys)
    assert code == 2 and "--gamma-ref" in err
    code, out, _ = run(["current", "--kappa", "0.1", "--gamma-ref", "1", "--nbar", "2"], capsys)
    assert code == 0 and json.loads(out)["params"]["kappa"] == 0.1


def test_verify_bound(capsys):
    code, out, _ = run(["verify-bound", "--nbar", "1", "--gxi2", "1.5"], capsys)
    cert = json.loads(out)
    assert code == 0
    assert cert["optimal_support"] == [[1.0, 1.0]]
    assert cert["optimal_value"] == pytest.approx(0.363636363636, abs=1e-12)


def test_distribution_and_custom_round_trip(tmp_path, capsys):
    path = tmp_path / "d.csv"
    assert cli.main(["distribution", "--stat", "thermal", "--nbar", "0.5", "--out", str(path)]) == 0
    assert path.read_text().startswith("n,P_n\n")
    custom = tmp_path / "c.csv"
    custom.write_text("n,P_n\n0,0\n1,1\n")
    code, out, _ = run(["current", "--stat", f"custom:{custom}", "--gxi2", "1.5"], capsys)
    assert code == 0 and json.loads(out)["J_over_gamma"] == pytest.approx(4 / 3, rel=1e-11)
    bad = tmp_path / "bad.csv"
    bad.write_text("n,P_n\n0,0.3\n")
    code, _, err = run(["current", "--stat", f"custom:{bad}"], capsys)
    assert code == 2 and "sum" in err


def test_outdir_environment_variable(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTDIR_ENV, str(tmp_path))
    assert cli.main(["sweep", "--sweep", "0:1:2"]) == 0
    assert (tmp_path / "sweep.csv").read_text().startswith(cli.SWEEP_HEADER)


def test_argument_errors(capsys):
    for argv in (["sweep", "--sweep", "5:1:10"], ["sweep", "--sweep", "0:1:1"],
                 ["current", "--gxi2", "0"], ["current", "--stat", "squeezed"]):
        with pytest.raises(SystemExit) as exc:
            cli.main(argv)
        assert exc.value.code == 2


def test_large_ratio_warning(capsys, caplog):
    code, _, _ = run(["current", "--gxi2", "1e9"], capsys)
    assert code == 0 and "very large" in caplog.text


def test_help_documents_ratio_convention(capsys):
    with pytest.raises(SystemExit):
        cli.main(["current", "--help"])
    out = capsys.readouterr().out
    assert "without" in out and "square" in out


def test_validate_quick_passes_and_is_fast(capsys):
    t0 = time.perf_counter()
    code, out, _ = run(["validate", "--quick"], capsys)
    assert time.perf_counter() - t0 < 5.0
    assert code == 0 and "FAIL (info)" in out


def test_validate_detects_perturbed_branch_current(capsys):
    code, out, err = run(["validate", "--quick", "--perturb-branch", "1e-3"], capsys)
    assert code == 1 and "branch_current" in err


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "photocurrent.cli", "current", "--nbar", "20",
                          "--stat", "thermal", "--format", "csv"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].split(",")[-1] == cli.fmt(thermal_current(20.0, 1.5))


def test_fmt_is_twelve_significant_digits():
    assert cli.fmt(1 / 3) == "0.333333333333"
    assert cli.fmt(-0.0) == "0"
    assert cli.fmt(123456789.123456) == "123456789.123"
