"""Artifact formats: energy.csv schema, VTK/raw snapshots, manifest."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from viscoflow import config as cfgmod
from viscoflow import constitutive as con
from viscoflow import energy as en
from viscoflow import grid as G
from viscoflow import output
from viscoflow import spd_algebra as sa


def small_fields(n=4, seed=11):
    g = G.Grid.periodic_box(n)
    rng = np.random.default_rng(seed)
    vel = G.VelocityField(rng.standard_normal((n + 1, n, n)),
                          rng.standard_normal((n, n + 1, n)),
                          rng.standard_normal((n, n, n + 1)))
    b6 = sa.random_spd(n * n * n, rng).reshape(n, n, n, 6)
    return g, vel, b6


def budget_fixture():
    return en.EnergyBudget(kinetic=0.1, free_energy=0.2, viscous_diss=0.3,
                           slip_diss=0.0, diff_diss_gamma=1e-17,
                           diff_diss_inv=0.4, relax_diss_1=0.5,
                           relax_diss_2=0.0, relax_diss_3=0.6,
                           work=-0.25, residual=-3.0517578125e-05)


def test_energy_columns_cover_budget_and_report():
    cols = output.ENERGY_COLUMNS
    for f in dataclasses.fields(en.EnergyBudget):
        assert f.name in cols
    for name in ("step", "t", "cfl", "poisson_cycles", "lam_min",
                 "det_min", "frob_max"):
        assert name in cols
    assert "seconds" not in cols  # wall time would break determinism
    assert len(cols) == len(set(cols))


def test_energy_writer_round_trips_floats(tmp_path):
    w = output.EnergyWriter()
    t = 0.1 + 0.2  # not representable prettily; repr must survive
    w.add(3, t, budget_fixture(), cfl=0.2997, poisson_cycles=7,
          lam_min=1e-300, det_min=0.5, frob_max=12.0)
    text = w.dump()
    lines = text.split("\r\n")
    assert lines[0] == ",".join(output.ENERGY_COLUMNS)
    assert lines[-1] == ""  # trailing CRLF
    vals = dict(zip(output.ENERGY_COLUMNS, lines[1].split(",")))
    assert int(vals["step"]) == 3
    assert float(vals["t"]) == t
    assert float(vals["residual"]) == -3.0517578125e-05
    assert float(vals["lam_min"]) == 1e-300
    assert int(vals["poisson_cycles"]) == 7

    path = tmp_path / "energy.csv"
    w.write(str(path))
    assert path.read_bytes().decode() == text


def test_vtk_snapshot_structure(tmp_path):
    g, vel, b6 = small_fields()
    path = tmp_path / "snap.vtk"
    output.write_vtk(str(path), vel, b6, g)
    lines = path.read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert lines[2] == "ASCII"
    assert lines[3] == "DATASET STRUCTURED_POINTS"
    assert lines[4] == "DIMENSIONS 4 4 4"
    assert lines[5].startswith("ORIGIN 0.125")
    assert lines[6].startswith("SPACING 0.25")
    assert lines[7] == "POINT_DATA 64"
    text = path.read_text()
    for name in ("conf_xx", "conf_yy", "conf_zz", "conf_xy", "conf_xz",
                 "conf_yz", "lambda_min"):
        assert f"SCALARS {name} double 1" in text
    assert "VECTORS velocity double" in text
    # x varies fastest: record for cell (1,0,0) follows cell (0,0,0)
    first = lines.index("SCALARS conf_xx double 1")
    assert float(lines[first + 2]) == b6[0, 0, 0, 0]
    assert float(lines[first + 3]) == b6[1, 0, 0, 0]


def test_raw_snapshot_round_trip(tmp_path):
    g, vel, b6 = small_fields()
    path = tmp_path / "snap.raw"
    output.write_raw(str(path), vel, b6, g)
    b, lam, vc = output.read_raw(str(path))
    assert np.array_equal(b, b6)
    assert np.array_equal(lam, sa.lambda_min(b6))
    assert np.array_equal(vc, G.center_velocity(vel, g))


def test_raw_reader_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.raw"
    path.write_bytes(b"PNG\x89 not ours\n")
    with pytest.raises(ValueError):
        output.read_raw(str(path))


def test_grid_hash_distinguishes_geometry():
    a = output.grid_hash(G.Grid.periodic_box(8))
    b = output.grid_hash(G.Grid.periodic_box(8))
    assert a == b
    assert a != output.grid_hash(G.Grid.periodic_box(16))
    assert a != output.grid_hash(G.Grid.channel(8, 8))


def test_manifest_embeds_reparseable_config(tmp_path):
    cfg = cfgmod.SimConfig(scenario="taylor_green", dt=0.001)
    g = cfg.grid()
    path = tmp_path / "manifest.txt"
    output.write_manifest(str(path), cfg, g, extra={"steps": 10})
    text = path.read_text()
    assert "status = ok" in text
    assert "steps = 10" in text
    assert f"grid_hash = {output.grid_hash(g)}" in text
    embedded = text.split("# --- full configuration ---\n", 1)[1]
    assert cfgmod.parse_config(embedded) == cfg


def test_manifest_records_failure(tmp_path):
    cfg = cfgmod.SimConfig()
    path = tmp_path / "manifest.txt"
    output.write_manifest(str(path), cfg, cfg.grid(),
                          error="PositivityLoss: min eigenvalue -0.1")
    text = path.read_text()
    assert "status = error" in text
    assert "error = PositivityLoss: min eigenvalue -0.1" in text


def test_ensure_out_dir(tmp_path):
    target = tmp_path / "a" / "b"
    got = output.ensure_out_dir(str(target))
    assert got == str(target)
    assert target.is_dir()
    assert output.ensure_out_dir(str(target)) == str(target)  # idempotent


def test_energy_writer_is_deterministic():
    def build():
        w = output.EnergyWriter()
        for k in range(4):
            w.add(k, k * 0.1, budget_fixture(), cfl=0.1 * k,
                  poisson_cycles=k, lam_min=1.0, det_min=1.0, frob_max=2.0)
        return w.dump()

    assert build() == build()
