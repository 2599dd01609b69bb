"""Canonical flow setups: rest, periodic vortex, driven cavity, shear decay.

Each scenario owns its boundary tags and initial data; body forces are the
runner's business (only the manufactured-solution mode injects any).  The
four cover both boundary kinds and both directions of the velocity/stress
coupling, which is all the verification suite needs.
"""

from __future__ import annotations

import dataclasses
import numpy as np

from . import constitutive as con
from . import grid as G
from . import spd_algebra as sa
from .errors import InadmissibleInitialData, ValidationError

SCENARIO_NAMES = ("rest_state", "taylor_green", "lid_slip_cavity",
                  "shear_decay")

# every option any scenario understands; the parser admits the union and
# build() rejects the ones a given scenario has no use for
SCENARIO_OPTION_KEYS = ("amplitude", "b0_scale", "lid_speed")


@dataclasses.dataclass
class ScenarioData:
    v0: G.VelocityField
    b0: np.ndarray
    wall_speed: dict[str, tuple[float, float, float]] | None = None

    def __post_init__(self):
        lam = float(sa.lambda_min(self.b0).min())
        if lam <= 0.0:
            raise InadmissibleInitialData(
                f"scenario initial conformation has min eigenvalue {lam:.3e}")


def grid_for(name: str, nx: int, ny: int, nz: int,
             lx: float = 1.0, ly: float = 1.0, lz: float = 1.0) -> G.Grid:
    """Grid with the boundary tags the named scenario requires."""
    if name not in SCENARIO_NAMES:
        raise ValidationError("scenario", f"unknown scenario {name!r}")
    hx, hy, hz = lx / nx, ly / ny, lz / nz
    if name in ("rest_state", "taylor_green"):
        bc = ("periodic",) * 6
    elif name == "lid_slip_cavity":
        bc = ("navier_slip",) * 6
    else:  # shear_decay: walls only across y
        bc = ("periodic", "periodic", "navier_slip", "navier_slip",
              "periodic", "periodic")
    return G.Grid(nx, ny, nz, hx, hy, hz, bc)


def _centers(g: G.Grid, ax: int) -> np.ndarray:
    h = (g.hx, g.hy, g.hz)[ax]
    return (np.arange(g.shape[ax]) + 0.5) * h


def _faces(g: G.Grid, ax: int) -> np.ndarray:
    h = (g.hx, g.hy, g.hz)[ax]
    return np.arange(g.shape[ax] + 1) * h


def _check_opts(name: str, opts: dict, allowed: tuple[str, ...]) -> None:
    for key in opts:
        if key not in allowed:
            raise ValidationError(
                "scenario." + key, f"not an option of {name}")


def build(name: str, g: G.Grid, p: con.ModelParams,
          opts: dict | None = None) -> ScenarioData:
    """Initial data for scenario `name` on grid `g`.

    Options: amplitude (velocity scale, default 1), b0_scale (conformation
    perturbation, default scenario-specific), lid_speed (cavity only).
    """
    opts = dict(opts or {})
    if name == "rest_state":
        _check_opts(name, opts, ())
        b0 = np.tile(sa.IDENT6, g.shape + (1,))
        return ScenarioData(G.VelocityField.zeros(g), b0)

    if name == "taylor_green":
        _check_opts(name, opts, ("amplitude", "b0_scale"))
        amp = float(opts.get("amplitude", 1.0))
        scale = float(opts.get("b0_scale", 0.3))
        if not (-1.0 < scale < 1.0):
            raise ValidationError("scenario.b0_scale",
                                  "must lie in (-1, 1) to keep B0 SPD")
        kx = 2.0 * np.pi / (g.nx * g.hx)
        ky = 2.0 * np.pi / (g.ny * g.hy)
        v0 = G.VelocityField.zeros(g)
        # same discrete wavenumber in both difference quotients, so the
        # staggered divergence of this sample is zero to rounding
        v0.u[:] = amp * (np.sin(kx * _faces(g, 0))[:, None, None]
                         * np.cos(ky * _centers(g, 1))[None, :, None])
        v0.v[:] = -amp * (np.cos(kx * _centers(g, 0))[:, None, None]
                          * np.sin(ky * _faces(g, 1))[None, :, None])
        sx = np.sin(kx * _centers(g, 0))[:, None, None]
        sy = np.sin(ky * _centers(g, 1))[None, :, None]
        b0 = np.tile(sa.IDENT6, g.shape + (1,))
        b0[..., 0] += scale * sx * sx
        b0[..., 1] += scale * sy * sy
        b0[..., 3] += 0.25 * scale * sx * sy
        return ScenarioData(v0, b0)

    if name == "lid_slip_cavity":
        _check_opts(name, opts, ("lid_speed",))
        lid = float(opts.get("lid_speed", 1.0))
        b0 = np.tile(sa.IDENT6, g.shape + (1,))
        ws = {"yhi": (lid, 0.0, 0.0)}
        return ScenarioData(G.VelocityField.zeros(g), b0, wall_speed=ws)

    if name == "shear_decay":
        _check_opts(name, opts, ("amplitude", "b0_scale"))
        amp = float(opts.get("amplitude", 1.0))
        scale = float(opts.get("b0_scale", 0.0))
        if scale <= -1.0:
            raise ValidationError("scenario.b0_scale", "must exceed -1")
        ly = g.ny * g.hy
        v0 = G.VelocityField.zeros(g)
        v0.u[:] = amp * np.cos(np.pi * _centers(g, 1) / ly)[None, :, None]
        b0 = np.tile(sa.IDENT6, g.shape + (1,))
        b0[..., 0] += scale
        return ScenarioData(v0, b0)

    raise ValidationError("scenario", f"unknown scenario {name!r}")
