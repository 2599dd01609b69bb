"""End-to-end command-line behavior: exit codes, artifacts, determinism.

Everything calls cli.main(argv) in process (fast, debuggable); one
subprocess test at the bottom proves the `python -m` wiring.
"""

from __future__ import annotations

import csv
import subprocess
import sys

import numpy as np
import pytest

from viscoflow import cli, output


def write_cfg(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_rows(out_dir):
    with open(out_dir / "energy.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return rows


REST_CFG = """\
[run]
scenario = rest_state
dt = 0.01
t_end = 0.03
[grid]
nx = 4
ny = 4
nz = 4
"""

TG_CFG = """\
[run]
scenario = taylor_green
dt = 0.005
t_end = 0.02
[grid]
nx = 8
ny = 8
nz = 8
"""


def test_run_rest_exit_zero_and_artifacts(tmp_path):
    cfg = write_cfg(tmp_path, REST_CFG)
    out = tmp_path / "out"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 4  # row 0 plus three steps
    first = rows[0]
    assert first["step"] == "0"
    assert float(first["t"]) == 0.0
    assert float(first["cfl"]) == 0.0
    assert first["poisson_cycles"] == "0"
    assert float(first["residual"]) == 0.0
    for row in rows:
        assert float(row["kinetic"]) == 0.0
        assert float(row["lam_min"]) == 1.0
    text = (out / "manifest.txt").read_text()
    assert "status = ok" in text
    assert "kernel_lane =" in text


def test_run_energy_cadence_includes_final_step(tmp_path):
    cfg = write_cfg(tmp_path, REST_CFG + "\n") \
        .replace("run.ini", "run.ini")  # path unchanged; quiet lint
    cfg = write_cfg(tmp_path, """\
[run]
scenario = rest_state
dt = 0.01
t_end = 0.05
energy_every = 2
[grid]
nx = 4
ny = 4
nz = 4
""", name="cadence.ini")
    out = tmp_path / "cad"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
    steps = [r["step"] for r in read_rows(out)]
    assert steps == ["0", "2", "4", "5"]


def test_run_is_bit_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, TG_CFG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", "--config", cfg, "--out", str(out1)]) == 0
    assert cli.main(["run", "--config", cfg, "--out", str(out2)]) == 0
    assert (out1 / "energy.csv").read_bytes() \
        == (out2 / "energy.csv").read_bytes()


def test_run_writes_raw_snapshots(tmp_path):
    cfg = write_cfg(tmp_path, """\
[run]
scenario = taylor_green
dt = 0.005
t_end = 0.03
snapshot_every = 2
snapshot_format = raw
[grid]
nx = 4
ny = 4
nz = 4
""")
    out = tmp_path / "snaps"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
    names = sorted(p.name for p in out.glob("snapshot_*.raw"))
    assert names == ["snapshot_000002.raw", "snapshot_000004.raw",
                     "snapshot_000006.raw"]
    b6, lam, vc = output.read_raw(str(out / "snapshot_000006.raw"))
    assert b6.shape == (4, 4, 4, 6)
    assert lam.shape == (4, 4, 4)
    assert vc.shape == (4, 4, 4, 3)
    assert float(lam.min()) > 0.0


def test_run_writes_vtk_snapshots(tmp_path):
    cfg = write_cfg(tmp_path, """\
[run]
scenario = taylor_green
dt = 0.005
t_end = 0.01
snapshot_every = 1
[grid]
nx = 4
ny = 4
nz = 4
""")
    out = tmp_path / "vtk"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
    snap = out / "snapshot_000001.vtk"
    assert snap.read_text().startswith("# vtk DataFile Version 3.0")


def test_missing_config_file_is_config_error(tmp_path):
    assert cli.main(["run", "--config", str(tmp_path / "nope.ini")]) == 2


def test_bad_config_value_is_config_error(tmp_path):
    cfg = write_cfg(tmp_path, "[run]\ndt = -1\n")
    assert cli.main(["run", "--config", cfg]) == 2


def test_negative_seed_override_is_config_error(tmp_path):
    cfg = write_cfg(tmp_path, REST_CFG)
    assert cli.main(["run", "--config", cfg, "--seed", "-3",
                     "--out", str(tmp_path / "o")]) == 2


def test_bad_thread_count_is_config_error(tmp_path):
    cfg = write_cfg(tmp_path, REST_CFG)
    assert cli.main(["run", "--config", cfg, "--threads", "0",
                     "--out", str(tmp_path / "o")]) == 2


def test_scenario_failure_still_writes_manifest(tmp_path):
    cfg = write_cfg(tmp_path, """\
[run]
scenario = shear_decay
[scenario]
b0_scale = -2
""")
    out = tmp_path / "broken"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 2
    text = (out / "manifest.txt").read_text()
    assert "status = error" in text
    assert "ValidationError" in text
    assert (out / "energy.csv").exists()  # header-only, but present


def test_positivity_loss_exits_three(tmp_path):
    # huge relaxation overshoot: uniform B = diag(6,1,1) at rest with a
    # dt = 3 explicit step sends the top eigenvalue negative immediately
    cfg = write_cfg(tmp_path, """\
[run]
scenario = shear_decay
dt = 3
t_end = 3
[grid]
nx = 4
ny = 4
nz = 4
[scenario]
amplitude = 0
b0_scale = 5
""")
    out = tmp_path / "blow"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 3
    text = (out / "manifest.txt").read_text()
    assert "status = error" in text
    assert "PositivityLoss" in text
    assert len(read_rows(out)) == 1  # only the initial row landed


def test_check_identities_clean(tmp_path):
    cfg = write_cfg(tmp_path, "[identities]\ndraws = 2000\n")
    out = tmp_path / "ids"
    assert cli.main(["check_identities", "--config", cfg,
                     "--out", str(out)]) == 0
    report = (out / "identities_report.txt").read_text()
    assert "max relative residual" in report
    assert "convexity slack" in report
    assert not (out / "identity_violation.txt").exists()


def test_check_identities_planted_bug_exits_four(tmp_path):
    cfg = write_cfg(tmp_path,
                    "[identities]\ndraws = 2000\nbug = negate_gamma\n")
    out = tmp_path / "bug"
    assert cli.main(["check_identities", "--config", cfg,
                     "--out", str(out)]) == 4
    viol = (out / "identity_violation.txt").read_text()
    assert "eigenvalues" in viol
    assert "residual" in viol


def test_check_identities_seed_override_lands_in_report(tmp_path):
    cfg = write_cfg(tmp_path, "[identities]\ndraws = 500\n")
    out = tmp_path / "seeded"
    assert cli.main(["check_identities", "--config", cfg,
                     "--out", str(out), "--seed", "99"]) == 0
    assert "seed = 99" in (out / "identities_report.txt").read_text()


def test_verify_mms_tiny_ladder(tmp_path):
    cfg = write_cfg(tmp_path, """\
[run]
mode = verify_mms
dt = 0.002
t_end = 0.004
[grid]
nx = 4
""")
    out = tmp_path / "mms"
    assert cli.main(["verify_mms", "--config", cfg,
                     "--out", str(out)]) == 0
    report = (out / "mms_report.txt").read_text()
    assert "observed spatial order v" in report
    assert "observed temporal order b" in report


def test_verify_mms_rejects_active_cutoff(tmp_path):
    cfg = write_cfg(tmp_path, "[model]\neps = 0.05\n")
    assert cli.main(["verify_mms", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2


def test_sweep_eps_monotone_distances(tmp_path):
    cfg = write_cfg(tmp_path, """\
[run]
scenario = taylor_green
dt = 0.005
t_end = 0.02
[grid]
nx = 8
ny = 8
nz = 8
[sweep]
eps_values = 0.2, 0.05, 0.0
""")
    out = tmp_path / "sweep"
    assert cli.main(["sweep_eps", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "sweep_eps.csv").read_text().splitlines()
    assert lines[0].startswith("eps,dist_v,dist_b")
    assert lines[-1] == "# monotone decreasing toward eps=0: True"
    for eps in ("0.2", "0.05", "0"):
        assert (out / f"eps_{eps}" / "energy.csv").exists()
    # the eps = 0 row is the self-distance
    zero_row = [ln for ln in lines[1:-1] if ln.startswith("0,")][0]
    _, dv, db = zero_row.split(",")[:3]
    assert float(dv) == 0.0 and float(db) == 0.0


def test_sweep_eps_requires_reference_run(tmp_path):
    cfg = write_cfg(tmp_path, "[sweep]\neps_values = 0.1, 0.05\n")
    assert cli.main(["sweep_eps", "--config", cfg,
                     "--out", str(tmp_path / "o")]) == 2


def test_sweep_gamma_writes_table(tmp_path):
    cfg = write_cfg(tmp_path, """\
[run]
scenario = taylor_green
dt = 0.005
t_end = 0.01
[grid]
nx = 8
ny = 8
nz = 8
[sweep]
gamma_values = 0.2, 0.8
""")
    out = tmp_path / "gsweep"
    assert cli.main(["sweep_gamma", "--config", cfg,
                     "--out", str(out)]) == 0
    lines = (out / "sweep_gamma.csv").read_text().splitlines()
    assert lines[0].startswith("gamma,kinetic,free_energy")
    assert len(lines) == 3
    assert (out / "gamma_0.2" / "manifest.txt").exists()
    assert (out / "gamma_0.8" / "manifest.txt").exists()
    # first row is its own reference
    assert lines[1].endswith(",0.000000000e+00,0.000000000e+00")


def test_defaults_run_without_config_file(tmp_path):
    # omitting --config entirely must fall back to the built-in defaults
    assert cli.main(["run", "--out", str(tmp_path / "d")]) == 0


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path, REST_CFG)
    proc = subprocess.run(
        [sys.executable, "-m", "viscoflow", "run", "--config", cfg,
         "--out", str(tmp_path / "sub")],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "sub" / "energy.csv").exists()
    proc_bad = subprocess.run(
        [sys.executable, "-m", "viscoflow", "warp"],
        capture_output=True, text=True)
    assert proc_bad.returncode == 2  # argparse usage failure
