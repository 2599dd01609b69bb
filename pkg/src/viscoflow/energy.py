"""Energy bookkeeping: budget terms, positivity margins, weak residuals.

Everything here is read-only over the simulation state.  Integrals use the
midpoint rule on cells (boundary terms: midpoint rule on wall faces),
which matches the second-order stencils; fancier quadrature would add
nothing on piecewise-derived fields.
"""

from __future__ import annotations

import dataclasses
from typing import NamedTuple

import numpy as np

from . import constitutive as con
from . import grid as G
from . import spd_algebra as sa
from .errors import InvalidTestField, PositivityLoss
from .stepper import SimState


@dataclasses.dataclass(frozen=True)
class EnergyBudget:
    kinetic: float
    free_energy: float
    viscous_diss: float
    slip_diss: float
    diff_diss_gamma: float
    diff_diss_inv: float
    relax_diss_1: float
    relax_diss_2: float
    relax_diss_3: float
    work: float
    residual: float

    DISSIPATION_FIELDS = ("viscous_diss", "slip_diss", "diff_diss_gamma",
                          "diff_diss_inv", "relax_diss_1", "relax_diss_2",
                          "relax_diss_3")

    @property
    def total_energy(self) -> float:
        return self.kinetic + self.free_energy

    @property
    def total_dissipation(self) -> float:
        return sum(getattr(self, k) for k in self.DISSIPATION_FIELDS)


def _unique_faces(arr: np.ndarray, g: G.Grid, ax: int) -> np.ndarray:
    """Drop the duplicated periodic twin so each face is counted once.

    Wall axes keep every face: the pinned wall faces are exactly zero and
    the interior dual cells tile the domain, so uniform weights are right.
    """
    return arr[G._sl(ax, slice(0, -1))] if g.periodic_axis(ax) else arr


def _face_inner(a_trip, b_trip, g: G.Grid) -> float:
    acc = 0.0
    for ax, (a, b) in enumerate(zip(a_trip, b_trip)):
        au = _unique_faces(a, g, ax)
        bu = _unique_faces(b, g, ax)
        acc += float(np.sum(au * bu))
    return acc * g.cell_volume


def _center_force(f, g: G.Grid) -> np.ndarray:
    fu, fv, fw = f
    out = np.empty(g.shape + (3,))
    out[..., 0] = 0.5 * (fu[:-1] + fu[1:])
    out[..., 1] = 0.5 * (fv[:, :-1] + fv[:, 1:])
    out[..., 2] = 0.5 * (fw[:, :, :-1] + fw[:, :, 1:])
    return out


def _wall_trace(pv: G.PaddedVelocity, g: G.Grid, ax: int, side: int,
                ci: int) -> np.ndarray:
    """Tangential component ci of v at the wall, sampled at wall-cell midpoints.

    The trace at the wall is the average of the first interior value and
    its ghost (the same trace the slip relation balances); the result is
    then pair-averaged from face positions to the nx-by-nz (etc) wall cells.
    """
    arr = (pv.u, pv.v, pv.w)[ci]
    tr = 0.5 * (G._wall_plane(arr, ax, side, 1)
                + G._wall_plane(arr, ax, side, 0))
    pax = ci if ci < ax else ci - 1
    oax = 1 - pax
    tr = 0.5 * (tr[G._sl(pax, slice(1, -2), 2)]
                + tr[G._sl(pax, slice(2, -1), 2)])
    return tr[G._sl(oax, slice(1, -1), 2)]


def _wall_cross(pva: G.PaddedVelocity, pvb: G.PaddedVelocity,
                g: G.Grid) -> float:
    """Wall integral of the traces of two velocity fields (midpoint rule)."""
    total = 0.0
    areas = (g.hy * g.hz, g.hx * g.hz, g.hx * g.hy)
    for ax in range(3):
        if g.periodic_axis(ax):
            continue
        for side in (0, 1):
            acc = 0.0
            for ci in range(3):
                if ci == ax:
                    continue
                prod = (_wall_trace(pva, g, ax, side, ci)
                        * _wall_trace(pvb, g, ax, side, ci))
                acc = acc + prod
            total += float(np.sum(acc)) * areas[ax]
    return total


def compute_budget(s: SimState, f=None,
                   wall_speed=None) -> EnergyBudget:
    """Evaluate every energy-identity term on the current state.

    f: None, an (fu, fv, fw) face triple, or a callable (t, grid) -> triple.
    The residual field is left 0 here; budget_residual fills it from a
    history.  Raises SingularMatrix (via the free energy) when positivity
    fails at any cell.
    """
    g, p = s.grid, s.params
    vol = g.cell_volume
    vtrip = (s.vel.u, s.vel.v, s.vel.w)
    # face (dual-cell midpoint) quadrature: the transport and projection
    # operators are exactly energy-neutral in this inner product, so the
    # budget defect tracks the time-splitting error instead of an O(h^2)
    # sampling artifact
    kinetic = 0.5 * _face_inner(vtrip, vtrip, g)

    psi = con.free_energy(s.b6, p)
    free_en = float(np.sum(psi)) * vol

    pv = G.apply_navier_slip(s.vel, s.b6, p, g, wall_speed=wall_speed)
    d6, _ = G.sym_antisym_split(G.grad_velocity(pv, g))
    viscous = 2.0 * p.nu * float(np.sum(sa.frob(d6, d6))) * vol

    slip = p.sigma * _wall_cross(pv, pv, g)

    grads = G.gradient_tensor(G.pad_sym6(s.b6, g, 1), g)
    parts = sa.budget_pointwise(s.b6, grads, p.mu, p.gamma)
    coef = p.mu * p.lambda_diff
    diff_gamma = coef * p.gamma * float(np.sum(parts["grad_quad"])) * vol
    diff_inv = (coef * (1.0 - p.gamma)
                * float(np.sum(parts["grad_log"])) * vol)
    relax_1 = (p.mu * (1.0 - p.gamma) * p.delta1
               * float(np.sum(parts["relax_log"])) * vol)
    relax_2 = (p.mu * p.gamma * p.delta2
               * float(np.sum(parts["relax_quad"])) * vol)
    relax_3 = (p.mu * (p.gamma * p.delta1 + (1.0 - p.gamma) * p.delta2)
               * float(np.sum(parts["dist_quad"])) * vol)

    work = 0.0
    if f is not None:
        ftrip = f(s.t, g) if callable(f) else f
        work = _face_inner(ftrip, vtrip, g)

    return EnergyBudget(kinetic=kinetic, free_energy=free_en,
                        viscous_diss=viscous, slip_diss=slip,
                        diff_diss_gamma=diff_gamma, diff_diss_inv=diff_inv,
                        relax_diss_1=relax_1, relax_diss_2=relax_2,
                        relax_diss_3=relax_3, work=work, residual=0.0)


def budget_residual(history, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-step budget defect of the discrete energy inequality.

    residual_n = [E(t_n) - E(0)] + sum_{m<=n} dt * dissipation_m
               - sum_{m<=n} dt * work_m
    with E = kinetic + free_energy and the sums over steps 1..n (right
    endpoint rule, matching the first-order march).  Returns the signed
    residuals and their positive parts; the model predicts <= 0 up to
    discretization error.
    """
    if len(history) < 2:
        raise ValueError("budget_residual needs at least two entries")
    e = np.array([b.total_energy for b in history])
    diss = np.array([b.total_dissipation for b in history])
    wrk = np.array([b.work for b in history])
    acc = np.concatenate(([0.0], np.cumsum(diss[1:] - wrk[1:])))
    signed = (e - e[0]) + dt * acc
    return signed, np.maximum(signed, 0.0)


class PositivityReport(NamedTuple):
    min_lambda: float
    argmin_cell: tuple[int, int, int]
    min_det: float
    histogram: tuple[np.ndarray, np.ndarray]


def positivity_report(b6: np.ndarray, eps: float = 0.0,
                      bins: int = 16) -> PositivityReport:
    """Eigenvalue floor diagnostics; asserts the regularized bound.

    With eps > 0 the cutoff scheme guarantees min lambda >= eps - 1e-10;
    a violation is a scheme bug and raises PositivityLoss.  With eps = 0
    the margin is only reported.
    """
    lam = sa.lambda_min(b6)
    flat = np.ravel(lam)
    idx = int(np.argmin(flat))
    min_lam = float(flat[idx])
    cell = np.unravel_index(idx, lam.shape) if lam.ndim else (0, 0, 0)
    min_det = float(sa.det(b6).min())
    hist = np.histogram(flat, bins=bins)
    if eps > 0.0 and min_lam < eps - 1e-10:
        raise PositivityLoss(
            f"regularized floor violated: min eigenvalue {min_lam:.6e} "
            f"< eps - 1e-10 = {eps - 1e-10:.6e}")
    return PositivityReport(min_lam, tuple(int(c) for c in cell),
                            min_det, hist)


def _check_velocity_test(phi: G.VelocityField, g: G.Grid) -> None:
    div = G.divergence(phi, g)
    if float(np.abs(div).max()) > 1e-8:
        raise InvalidTestField(
            f"velocity test field has divergence {np.abs(div).max():.3e}")
    for ax, comp in enumerate((phi.u, phi.v, phi.w)):
        if g.periodic_axis(ax):
            continue
        worst = max(float(np.abs(comp[G._sl(ax, slice(0, 1))]).max()),
                    float(np.abs(comp[G._sl(ax, slice(-1, None))]).max()))
        if worst > 1e-8:
            raise InvalidTestField(
                f"velocity test field pierces a wall by {worst:.3e}")


def _as_sym6(test: np.ndarray, g: G.Grid) -> np.ndarray:
    arr = np.asarray(test, dtype=np.float64)
    if arr.shape == g.shape + (3, 3):
        gap = float(np.abs(arr - np.swapaxes(arr, -1, -2)).max())
        if gap > 1e-8:
            raise InvalidTestField(
                f"tensor test field asymmetric by {gap:.3e}")
        return sa.from_full(0.5 * (arr + np.swapaxes(arr, -1, -2)))
    if arr.shape == g.shape + (6,):
        return arr
    raise InvalidTestField("tensor test field shape matches neither packed "
                           "nor full layout")


def weak_residual(s_old: SimState, s_new: SimState, test, f=None,
                  wall_speed=None, advect: str = "muscl") -> float:
    """Weak-form residual of one step against a discrete test field.

    test: a VelocityField (momentum equation) or a symmetric tensor field
    (conformation equation).  Terms are assembled the way the stepper
    treats them — transport and sources at the old state, diffusion and
    viscosity at the new — so the result measures spatial and splitting
    error, O(dt + h^2) on smooth data, not a scheme mismatch.
    """
    g, p = s_new.grid, s_new.params
    vol = g.cell_volume
    dt = s_new.t - s_old.t
    if dt <= 0.0:
        raise ValueError("states must be ordered in time")

    if isinstance(test, G.VelocityField):
        _check_velocity_test(test, g)
        pv_old = G.apply_navier_slip(s_old.vel, s_old.b6, p, g,
                                     wall_speed=wall_speed)
        adv = G.advect_velocity(pv_old, s_old.vel, g)
        dvdt = G.VelocityField((s_new.vel.u - s_old.vel.u) / dt,
                               (s_new.vel.v - s_old.vel.v) / dt,
                               (s_new.vel.w - s_old.vel.w) / dt)
        inertial = G.center_velocity(dvdt, g)
        inertial += _center_force(adv, g)
        if f is not None:
            ftrip = f(s_old.t, g) if callable(f) else f
            inertial -= _center_force(ftrip, g)
        phic = G.center_velocity(test, g)
        res = float(np.sum(inertial * phic)) * vol

        pv_new = G.apply_navier_slip(s_new.vel, s_new.b6, p, g,
                                     wall_speed=wall_speed)
        pv_test = G.apply_navier_slip(test.copy(), None, p, g,
                                      homogeneous=True)
        d_new, _ = G.sym_antisym_split(G.grad_velocity(pv_new, g))
        d_test, _ = G.sym_antisym_split(G.grad_velocity(pv_test, g))
        res += 2.0 * p.nu * float(np.sum(sa.frob(d_new, d_test))) * vol

        s6 = con.stress_S(s_new.b6, p)
        if p.eps > 0.0:
            s6 = con.cutoff_rho(s_new.b6, p.eps)[..., None] * s6
        res += (2.0 * p.a * p.mu
                * float(np.sum(sa.frob(s6, d_test))) * vol)

        if p.sigma > 0.0 and not g.all_periodic:
            res += p.sigma * _wall_cross(pv_new, pv_test, g)
        return abs(res)

    a6 = _as_sym6(test, g)
    pv_old = G.apply_navier_slip(s_old.vel, s_old.b6, p, g,
                                 wall_speed=wall_speed)
    grad_v = G.grad_velocity(pv_old, g)
    if advect == "muscl":
        adv_b = G.advect_tensor(s_old.vel, G.pad_sym6(s_old.b6, g, 2), g)
    else:
        adv_b = G.advect_tensor_centered(s_old.vel,
                                         G.pad_sym6(s_old.b6, g, 1), g)
    src = sa.objective_source(s_old.b6, grad_v, p.a)
    src -= con.relax_R(s_old.b6, p)
    if p.eps > 0.0:
        src *= con.cutoff_rho(s_old.b6, p.eps)[..., None]
    resid_field = (s_new.b6 - s_old.b6) / dt + adv_b - src
    if f is not None:
        fb = f(s_old.t, g) if callable(f) else f
        resid_field = resid_field - fb
    res = float(np.sum(sa.frob(resid_field, a6))) * vol
    gb = G.gradient_tensor(G.pad_sym6(s_new.b6, g, 1), g)
    ga = G.gradient_tensor(G.pad_sym6(a6, g, 1), g)
    res += p.lambda_diff * float(np.sum(sa.frob(gb, ga))) * vol
    return abs(res)
