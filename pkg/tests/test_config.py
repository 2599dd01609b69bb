"""Config text round-trips, rejection diagnostics, preset semantics."""

from __future__ import annotations

import dataclasses
import pathlib

import pytest

from viscoflow import config as cfgmod
from viscoflow.errors import ParseError, ValidationError

SAMPLE = pathlib.Path(__file__).resolve().parent.parent \
    / "docs" / "sample_config.ini"


def test_empty_text_gives_defaults():
    cfg = cfgmod.parse_config("")
    assert cfg == cfgmod.SimConfig()
    assert cfg.mode == "run" and cfg.scenario == "rest_state"
    assert cfg.params.delta1 == 1.0 and cfg.params.delta2 == 0.0
    assert cfg.eps_values == (0.1, 0.05, 0.01, 0.0)


def test_emit_parse_round_trip():
    cfg = cfgmod.SimConfig(
        mode="sweep_eps", scenario="taylor_green", dt=0.00125, t_end=0.7,
        cfl_cap=0.25, advect="centered", energy_every=5, snapshot_every=10,
        snapshot_format="raw", out_dir="runs/x1", seed=7,
        nx=24, ny=12, nz=6, lx=2.0, ly=1.0, lz=0.5,
        preset="giesekus",
        params=cfgmod.con.ModelParams(nu=0.07, mu=0.9, lambda_diff=0.003,
                                      sigma=25.0, delta1=0.0, delta2=1.0,
                                      a=0.5, gamma=0.35, eps=0.02),
        scenario_opts={"amplitude": 0.4, "b0_scale": 0.1},
        eps_values=(0.2, 0.0), gamma_values=(0.25, 0.75),
        id_draws=1000, id_bug="none")
    text = cfgmod.emit_config(cfg)
    assert cfgmod.parse_config(text) == cfg
    assert cfgmod.emit_config(cfgmod.parse_config(text)) == text


def test_sample_config_is_canonical():
    text = SAMPLE.read_text()
    cfg = cfgmod.parse_config(text)
    assert cfg.scenario == "taylor_green"
    assert cfgmod.emit_config(cfg) == text


def test_comments_and_blank_lines_ignored():
    cfg = cfgmod.parse_config(
        "# leading comment\n"
        "\n"
        "[run]\n"
        "dt = 0.01   # in time units\n"
        "  t_end = 0.2\n")
    assert cfg.dt == 0.01 and cfg.t_end == 0.2


def test_scalar_sweep_value_becomes_tuple():
    cfg = cfgmod.parse_config("[sweep]\neps_values = 0.05\n")
    assert cfg.eps_values == (0.05,)


def test_preset_sets_deltas_and_explicit_overrides_win():
    cfg = cfgmod.parse_config("[model]\npreset = giesekus\n")
    assert (cfg.params.delta1, cfg.params.delta2) == (0.0, 1.0)
    cfg = cfgmod.parse_config(
        "[model]\npreset = giesekus\ndelta1 = 0.4\n")
    assert (cfg.params.delta1, cfg.params.delta2) == (0.4, 1.0)


@pytest.mark.parametrize("text,line,substr", [
    ("[run\ndt = 1\n", 1, "unterminated"),
    ("[mystery]\n", 1, "unknown section"),
    ("dt = 0.01\n", 1, "before any"),
    ("[run]\ndt\n", 2, "key = value"),
    ("[run]\n= 3\n", 2, "empty key"),
    ("[run]\ndt = 1e-3\ndt = 2e-3\n", 3, "duplicate"),
    ("[run]\nwarp = 9\n", 2, "unknown key"),
    ("[grid]\nnx = 8\n[grid2]\n", 3, "unknown section"),
])
def test_parse_errors_carry_line_numbers(text, line, substr):
    with pytest.raises(ParseError) as exc:
        cfgmod.parse_config(text)
    assert exc.value.line == line
    assert substr in exc.value.reason


@pytest.mark.parametrize("text,key", [
    ("[run]\ndt = 0\n", "dt"),
    ("[run]\ndt = fast\n", "dt"),
    ("[run]\nt_end = -1\n", "t_end"),
    ("[run]\ncfl_cap = 0.6\n", "cfl_cap"),
    ("[run]\ncfl_cap = 0\n", "cfl_cap"),
    ("[run]\nmode = fly\n", "mode"),
    ("[run]\nadvect = upwind99\n", "advect"),
    ("[run]\nenergy_every = 0\n", "energy_every"),
    ("[run]\nsnapshot_every = -2\n", "snapshot_every"),
    ("[run]\nsnapshot_format = hdf\n", "snapshot_format"),
    ("[run]\nseed = -1\n", "seed"),
    ("[run]\nseed = 1.5\n", "seed"),
    ("[grid]\nnx = 0\n", "nx"),
    ("[grid]\nly = 0\n", "ly"),
    ("[model]\npreset = fene\n", "preset"),
    ("[model]\nclassical_ob = 1\n", "classical_ob"),
    ("[model]\ngamma = 1.5\n", "gamma"),
    ("[sweep]\neps_values = 0.1, 1.0\n", "eps_values"),
    ("[sweep]\ngamma_values = 0.0, 0.5\n", "gamma_values"),
    ("[identities]\ndraws = 0\n", "draws"),
    ("[identities]\nbug = typo\n", "bug"),
])
def test_validation_errors_name_the_key(text, key):
    with pytest.raises(ValidationError) as exc:
        cfgmod.parse_config(text)
    assert exc.value.key == key


def test_scenario_options_parsed_as_floats():
    cfg = cfgmod.parse_config(
        "[scenario]\namplitude = 0.5\nlid_speed = 2\n")
    assert cfg.scenario_opts == {"amplitude": 0.5, "lid_speed": 2.0}
    with pytest.raises(ParseError):
        cfgmod.parse_config("[scenario]\nswirl = 1\n")


def test_grid_helper_reflects_scenario_geometry():
    cfg = cfgmod.parse_config(
        "[run]\nscenario = taylor_green\n[grid]\nnx = 8\nny = 8\nnz = 8\n")
    g = cfg.grid()
    assert g.shape == (8, 8, 8)
    assert g.all_periodic


def test_config_is_frozen():
    cfg = cfgmod.SimConfig()
    with pytest.raises(dataclasses.FrozenInstanceError):
        cfg.dt = 1.0
