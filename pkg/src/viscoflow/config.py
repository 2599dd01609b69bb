"""Plain-text run configuration: [section] headers, key = value lines.

The format is deliberately dumb: UTF-8, one assignment per line, # starts
a comment, unknown keys are errors.  parse_config and emit_config are
inverses; emitting is canonical (fixed section and key order, shortest
round-trip float formatting), so emit(parse(emit(c))) == emit(c) holds
byte for byte.
"""

from __future__ import annotations

import dataclasses

from . import constitutive as con
from . import grid as G
from . import scenarios
from .errors import ParseError, ValidationError

MODES = ("run", "verify_mms", "sweep_eps", "sweep_gamma", "check_identities")
ADVECT_SCHEMES = ("muscl", "centered")
SNAPSHOT_FORMATS = ("vtk", "raw")
PRESETS = ("oldroyd_b", "giesekus")

_PRESET_DELTAS = {"oldroyd_b": (1.0, 0.0), "giesekus": (0.0, 1.0)}


@dataclasses.dataclass(frozen=True)
class SimConfig:
    mode: str = "run"
    scenario: str = "rest_state"
    dt: float = 0.005
    t_end: float = 0.05
    cfl_cap: float = 0.3
    advect: str = "muscl"
    energy_every: int = 1
    snapshot_every: int = 0
    snapshot_format: str = "vtk"
    out_dir: str = "out"
    seed: int = 42
    nx: int = 16
    ny: int = 16
    nz: int = 16
    lx: float = 1.0
    ly: float = 1.0
    lz: float = 1.0
    preset: str = "oldroyd_b"
    params: con.ModelParams = dataclasses.field(
        default_factory=con.ModelParams)
    scenario_opts: dict = dataclasses.field(default_factory=dict)
    eps_values: tuple = (0.1, 0.05, 0.01, 0.0)
    gamma_values: tuple = (0.1, 0.5, 0.9)
    id_draws: int = 100000
    id_bug: str = "none"

    def grid(self) -> G.Grid:
        return scenarios.grid_for(self.scenario, self.nx, self.ny, self.nz,
                                  self.lx, self.ly, self.lz)

    def build_scenario(self, g: G.Grid) -> scenarios.ScenarioData:
        return scenarios.build(self.scenario, g, self.params,
                               self.scenario_opts)


_MODEL_KEYS = ("nu", "mu", "lambda_diff", "sigma", "delta1", "delta2",
               "a", "gamma", "eps")


def _parse_scalar(raw: str):
    low = raw.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def _want_float(val, key: str) -> float:
    if isinstance(val, bool) or isinstance(val, str):
        raise ValidationError(key, "expected a number")
    return float(val)


def _want_int(val, key: str) -> int:
    if isinstance(val, bool) or not isinstance(val, int):
        raise ValidationError(key, "expected an integer")
    return val


def _want_choice(val, key: str, choices) -> str:
    if not isinstance(val, str) or val not in choices:
        raise ValidationError(key, "must be one of " + ", ".join(choices))
    return val


def parse_config(text: str) -> SimConfig:
    """Parse config text; empty input yields the all-defaults config."""
    sections: dict[str, dict[str, tuple]] = {}
    section = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(line_no, "unterminated section header")
            name = line[1:-1].strip()
            if name not in ("run", "grid", "model", "scenario", "sweep",
                            "identities"):
                raise ParseError(line_no, f"unknown section [{name}]")
            section = sections.setdefault(name, {})
            continue
        if "=" not in line:
            raise ParseError(line_no, "expected key = value")
        if section is None:
            raise ParseError(line_no, "assignment before any [section]")
        key, _, raw_val = line.partition("=")
        key = key.strip()
        raw_val = raw_val.strip()
        if not key:
            raise ParseError(line_no, "empty key")
        if key in section:
            raise ParseError(line_no, f"duplicate key {key!r}")
        if "," in raw_val:
            vals = tuple(_parse_scalar(v.strip())
                         for v in raw_val.split(","))
            section[key] = (vals, line_no)
        else:
            section[key] = (_parse_scalar(raw_val), line_no)

    def take(sec: str, key: str, default):
        entry = sections.get(sec, {}).pop(key, None)
        return default if entry is None else entry[0]

    kw: dict = {}
    kw["mode"] = _want_choice(take("run", "mode", "run"), "mode", MODES)
    kw["scenario"] = _want_choice(take("run", "scenario", "rest_state"),
                                  "scenario", scenarios.SCENARIO_NAMES)
    kw["dt"] = _want_float(take("run", "dt", 0.005), "dt")
    kw["t_end"] = _want_float(take("run", "t_end", 0.05), "t_end")
    kw["cfl_cap"] = _want_float(take("run", "cfl_cap", 0.3), "cfl_cap")
    kw["advect"] = _want_choice(take("run", "advect", "muscl"), "advect",
                                ADVECT_SCHEMES)
    kw["energy_every"] = _want_int(take("run", "energy_every", 1),
                                   "energy_every")
    kw["snapshot_every"] = _want_int(take("run", "snapshot_every", 0),
                                     "snapshot_every")
    kw["snapshot_format"] = _want_choice(
        take("run", "snapshot_format", "vtk"), "snapshot_format",
        SNAPSHOT_FORMATS)
    out_dir = take("run", "out_dir", "out")
    if not isinstance(out_dir, str):
        raise ValidationError("out_dir", "expected a path string")
    kw["out_dir"] = out_dir
    kw["seed"] = _want_int(take("run", "seed", 42), "seed")
    if kw["seed"] < 0:
        raise ValidationError("seed", "must be >= 0")
    if kw["dt"] <= 0.0:
        raise ValidationError("dt", "must be > 0")
    if kw["t_end"] < 0.0:
        raise ValidationError("t_end", "must be >= 0")
    if not 0.0 < kw["cfl_cap"] <= 0.5:
        raise ValidationError("cfl_cap", "must lie in (0, 0.5]")
    for k in ("energy_every",):
        if kw[k] < 1:
            raise ValidationError(k, "must be >= 1")
    if kw["snapshot_every"] < 0:
        raise ValidationError("snapshot_every", "must be >= 0")

    for k in ("nx", "ny", "nz"):
        kw[k] = _want_int(take("grid", k, 16), k)
        if kw[k] < 1:
            raise ValidationError(k, "must be >= 1")
    for k in ("lx", "ly", "lz"):
        kw[k] = _want_float(take("grid", k, 1.0), k)
        if kw[k] <= 0.0:
            raise ValidationError(k, "must be > 0")

    kw["preset"] = _want_choice(take("model", "preset", "oldroyd_b"),
                                "preset", PRESETS)
    d1, d2 = _PRESET_DELTAS[kw["preset"]]
    model_kw = {"delta1": d1, "delta2": d2}
    for k in _MODEL_KEYS:
        entry = sections.get("model", {}).pop(k, None)
        if entry is not None:
            model_kw[k] = _want_float(entry[0], k)
    cls_entry = sections.get("model", {}).pop("classical_ob", None)
    if cls_entry is not None:
        if not isinstance(cls_entry[0], bool):
            raise ValidationError("classical_ob", "expected true/false")
        model_kw["classical_ob"] = cls_entry[0]
    kw["params"] = con.ModelParams(**model_kw)

    opts = {}
    for k in scenarios.SCENARIO_OPTION_KEYS:
        entry = sections.get("scenario", {}).pop(k, None)
        if entry is not None:
            opts[k] = _want_float(entry[0], "scenario." + k)
    kw["scenario_opts"] = opts

    def float_tuple(sec, key, default):
        val = take(sec, key, None)
        if val is None:
            return default
        if not isinstance(val, tuple):
            val = (val,)
        return tuple(_want_float(v, key) for v in val)

    kw["eps_values"] = float_tuple("sweep", "eps_values",
                                   (0.1, 0.05, 0.01, 0.0))
    kw["gamma_values"] = float_tuple("sweep", "gamma_values",
                                     (0.1, 0.5, 0.9))
    for e in kw["eps_values"]:
        if not 0.0 <= e < 1.0:
            raise ValidationError("eps_values", "entries must lie in [0, 1)")
    for gmm in kw["gamma_values"]:
        if not 0.0 < gmm < 1.0:
            raise ValidationError("gamma_values",
                                  "entries must lie in (0, 1)")

    kw["id_draws"] = _want_int(take("identities", "draws", 100000), "draws")
    if kw["id_draws"] < 1:
        raise ValidationError("draws", "must be >= 1")
    kw["id_bug"] = _want_choice(take("identities", "bug", "none"), "bug",
                                ("none", "negate_gamma"))

    # anything left behind in a known section is an unknown key
    for sec_name, sec in sections.items():
        for key, (_, line_no) in sec.items():
            raise ParseError(line_no, f"unknown key {key!r} in [{sec_name}]")

    return SimConfig(**kw)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_config(cfg: SimConfig) -> str:
    """Canonical text for cfg; parse_config inverts it exactly."""
    p = cfg.params
    lines = [
        "[run]",
        f"mode = {cfg.mode}",
        f"scenario = {cfg.scenario}",
        f"dt = {_fmt(cfg.dt)}",
        f"t_end = {_fmt(cfg.t_end)}",
        f"cfl_cap = {_fmt(cfg.cfl_cap)}",
        f"advect = {cfg.advect}",
        f"energy_every = {cfg.energy_every}",
        f"snapshot_every = {cfg.snapshot_every}",
        f"snapshot_format = {cfg.snapshot_format}",
        f"out_dir = {cfg.out_dir}",
        f"seed = {cfg.seed}",
        "",
        "[grid]",
        f"nx = {cfg.nx}", f"ny = {cfg.ny}", f"nz = {cfg.nz}",
        f"lx = {_fmt(cfg.lx)}", f"ly = {_fmt(cfg.ly)}",
        f"lz = {_fmt(cfg.lz)}",
        "",
        "[model]",
        f"preset = {cfg.preset}",
        f"nu = {_fmt(p.nu)}",
        f"mu = {_fmt(p.mu)}",
        f"lambda_diff = {_fmt(p.lambda_diff)}",
        f"sigma = {_fmt(p.sigma)}",
        f"delta1 = {_fmt(p.delta1)}",
        f"delta2 = {_fmt(p.delta2)}",
        f"a = {_fmt(p.a)}",
        f"gamma = {_fmt(p.gamma)}",
        f"eps = {_fmt(p.eps)}",
        f"classical_ob = {_fmt(p.classical_ob)}",
    ]
    if cfg.scenario_opts:
        lines += ["", "[scenario]"]
        for k in scenarios.SCENARIO_OPTION_KEYS:
            if k in cfg.scenario_opts:
                lines.append(f"{k} = {_fmt(cfg.scenario_opts[k])}")
    lines += [
        "",
        "[sweep]",
        "eps_values = " + ", ".join(_fmt(v) for v in cfg.eps_values),
        "gamma_values = " + ", ".join(_fmt(v) for v in cfg.gamma_values),
        "",
        "[identities]",
        f"draws = {cfg.id_draws}",
        f"bug = {cfg.id_bug}",
        "",
    ]
    return "\n".join(lines)
