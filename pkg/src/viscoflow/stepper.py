"""Semi-implicit time integration of the coupled field equations.

One step advances the conformation tensor first, then the velocity:

  (i)  B: explicit advection, damped objective-derivative source
       rho (a(DB+BD) + WB-BW), damped relaxation -rho R(B), then an
       implicit diffusion solve (I - dt lambda Lap) B = rhs componentwise.
  (ii) v: explicit advection and elastic force div(2 a mu rho S(B)),
       implicit viscous solve with the slip relations in the operator,
       pressure projection.

rho is the eigenvalue cutoff when eps > 0 (sources switch off wherever
lambda_min <= eps) and identically 1 otherwise.  First order in time by
construction; the energy monitor measures the O(dt) budget defect rather
than hiding it.

Positivity is never repaired: a post-update state with a non-positive
eigenvalue raises PositivityLoss.  B is stored in packed symmetric form,
so every substep returns an exactly symmetric tensor by construction.
"""

from __future__ import annotations

import dataclasses
import time
from typing import Callable

import numpy as np

from . import constitutive as con
from . import grid as G
from . import poisson
from . import spd_algebra as sa
from .errors import (CFLViolation, InadmissibleInitialData, PositivityLoss,
                     ValidationError, ViscoflowError)

WallSpeed = dict[str, tuple[float, float, float]]


@dataclasses.dataclass
class SimState:
    t: float
    step_index: int
    vel: G.VelocityField
    b6: np.ndarray
    pressure: np.ndarray
    grid: G.Grid
    params: con.ModelParams

    def copy(self) -> "SimState":
        return SimState(self.t, self.step_index, self.vel.copy(),
                        self.b6.copy(), self.pressure.copy(),
                        self.grid, self.params)


@dataclasses.dataclass
class StepReport:
    cfl: float
    poisson_cycles: int
    lam_min: float
    det_min: float
    frob_max: float
    seconds: float


def regularize_initial_B(b0: np.ndarray, eps: float) -> np.ndarray:
    """Replace B0 by the identity exactly where lambda_min <= eps.

    The replacement set shrinks with eps, so the L2 distance to the
    original field is monotone decreasing along an eps ladder.
    """
    if not (0.0 < eps < 1.0):
        raise ValidationError(
            "eps", "regularization needs 0 < eps < 1 so the identity "
            "replacement clears the threshold")
    lam = sa.lambda_min(b0)
    out = np.array(b0, dtype=np.float64, copy=True)
    out[lam <= eps] = sa.IDENT6
    return out


def init_state(v0: G.VelocityField, b0: np.ndarray, p: con.ModelParams,
               g: G.Grid) -> SimState:
    """Project v0 and admit (or regularize) B0.

    B0 with a non-positive eigenvalue anywhere is rejected when eps = 0;
    with eps > 0 the degraded cells are replaced by the identity instead.
    """
    if b0.shape != g.shape + (6,):
        raise ValidationError("B0", "shape does not match the grid")
    for arr, want in ((v0.u, (g.nx + 1, g.ny, g.nz)),
                      (v0.v, (g.nx, g.ny + 1, g.nz)),
                      (v0.w, (g.nx, g.ny, g.nz + 1))):
        if arr.shape != want:
            raise ValidationError("v0", "face array shapes do not match "
                                  "the grid")
    b0 = np.array(b0, dtype=np.float64, copy=True)
    if p.eps > 0.0:
        b0 = regularize_initial_B(b0, p.eps)
    else:
        lam_min_val = float(sa.lambda_min(b0).min())
        if lam_min_val <= 0.0:
            raise InadmissibleInitialData(
                f"initial conformation has min eigenvalue {lam_min_val:.6e}"
                " and no regularization is active")
    vel = v0.copy()
    vel, _ = poisson.pressure_project(vel, g, dt=1.0)
    return SimState(t=0.0, step_index=0, vel=vel, b6=b0,
                    pressure=np.zeros(g.shape), grid=g, params=p)


def dt_for_cfl(vel: G.VelocityField, g: G.Grid, target: float = 0.3,
               dt_max: float = 1.0) -> float:
    speed = vel.max_speed()
    if speed == 0.0:
        return dt_max
    return min(dt_max, target * g.min_spacing / speed)


def _resolve_forcing(f, t: float, g: G.Grid):
    return f(t, g) if callable(f) else f


def step(s: SimState, dt: float, *, wall_speed: WallSpeed | None = None,
         force_v=None, force_b=None, advect: str = "muscl",
         helm_tol: float = 1e-12,
         proj_tol: float = 1e-10) -> tuple[SimState, StepReport]:
    """One semi-implicit time step; returns the new state and a report.

    force_v: None, a (fu, fv, fw) face-array triple, or a callable
    (t, grid) -> triple.  force_b: same shape contract for a cell tensor
    source.  advect chooses the limited production scheme ("muscl") or the
    energy-neutral centered one ("centered") for the B transport.
    """
    t0 = time.perf_counter()
    if dt <= 0.0 or not np.isfinite(dt):
        raise ValidationError("dt", "must be a finite number > 0")
    if advect not in ("muscl", "centered"):
        raise ValidationError("advect", "must be 'muscl' or 'centered'")
    g, p = s.grid, s.params
    vel, b6 = s.vel, s.b6

    speed = vel.max_speed()
    cfl = speed * dt / g.min_spacing
    if cfl > 0.5 + 1e-12:
        raise CFLViolation(
            f"CFL {cfl:.3f} > 0.5 (max speed {speed:.3e}, dt {dt:.3e})")

    pv = G.apply_navier_slip(vel, b6, p, g, wall_speed=wall_speed)
    grad_v = G.grad_velocity(pv, g)

    # conformation update
    if advect == "muscl":
        adv_b = G.advect_tensor(vel, G.pad_sym6(b6, g, 2), g)
    else:
        adv_b = G.advect_tensor_centered(vel, G.pad_sym6(b6, g, 1), g)
    src = con.relax_R(b6, p)
    np.negative(src, out=src)
    src += sa.objective_source(b6, grad_v, p.a)
    if p.eps > 0.0:
        src *= con.cutoff_rho(b6, p.eps)[..., None]
    src -= adv_b
    fb = _resolve_forcing(force_b, s.t, g)
    if fb is not None:
        src += fb
    rhs_b = b6 + dt * src
    b_new = poisson.solve_helmholtz_tensor(rhs_b, g, dt * p.lambda_diff,
                                           tol=helm_tol)
    lam = sa.lambda_min(b_new)
    lam_min_val = float(lam.min())
    if lam_min_val <= 0.0:
        raise PositivityLoss(
            f"conformation lost positivity: min eigenvalue "
            f"{lam_min_val:.6e} after the update at t={s.t + dt:.6g}")

    # velocity update, elastic force taken from the fresh conformation
    adv_u, adv_v, adv_w = G.advect_velocity(pv, vel, g)
    s6 = con.stress_S(b_new, p)
    if p.eps > 0.0:
        s6 *= con.cutoff_rho(b_new, p.eps)[..., None]
    fu, fv, fw = G.elastic_force((2.0 * p.a * p.mu) * s6, g)
    vstar = G.VelocityField(vel.u + dt * (fu - adv_u),
                            vel.v + dt * (fv - adv_v),
                            vel.w + dt * (fw - adv_w))
    fvv = _resolve_forcing(force_v, s.t, g)
    if fvv is not None:
        vstar.u += dt * fvv[0]
        vstar.v += dt * fvv[1]
        vstar.w += dt * fvv[2]
    G.enforce_normal_bc(vstar, g)
    vtmp = poisson.solve_helmholtz_velocity(
        vstar, g, dt * p.nu, p, b6=b_new, wall_speed=wall_speed,
        tol=helm_tol)
    stats: dict = {}
    vel_new, phi = poisson.pressure_project(vtmp, g, dt, tol=proj_tol,
                                            stats=stats)

    report = StepReport(
        cfl=cfl,
        poisson_cycles=stats.get("cycles", 0),
        lam_min=lam_min_val,
        det_min=float(sa.det(b_new).min()),
        frob_max=float(sa.frob_norm(b_new).max()),
        seconds=time.perf_counter() - t0,
    )
    s_new = SimState(t=s.t + dt, step_index=s.step_index + 1, vel=vel_new,
                     b6=b_new, pressure=phi, grid=g, params=p)
    return s_new, report


def run(s0: SimState, t_end: float, dt: float,
        monitor: Callable[[SimState, StepReport], None] | None = None,
        **step_kwargs) -> tuple[SimState, list[StepReport]]:
    """March from s0 to t_end; the last partial step is clamped to land
    exactly on t_end.  Errors gain .step_index and .last_state attributes
    and propagate."""
    if t_end < s0.t:
        raise ValidationError("t_end", "must be >= the initial time")
    s = s0
    reports: list[StepReport] = []
    while s.t < t_end - 1e-12 * max(1.0, abs(t_end)):
        dt_eff = min(dt, t_end - s.t)
        try:
            s, rep = step(s, dt_eff, **step_kwargs)
        except ViscoflowError as err:
            err.step_index = s.step_index + 1
            err.last_state = s
            raise
        reports.append(rep)
        if monitor is not None:
            monitor(s, rep)
    return s, reports
