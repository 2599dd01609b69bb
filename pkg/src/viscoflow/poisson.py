"""Elliptic solves: pressure Poisson and the implicit diffusion steps.

Three solvers share this module because they share boundary handling:

* solve_poisson: cell-centered Laplacian with the grid's tags (periodic
  wrap or zero normal derivative at walls).  FFT inversion of the exact
  discrete symbol when fully periodic, otherwise geometric multigrid with
  red-black Gauss-Seidel smoothing.
* solve_helmholtz_tensor: (I - coef*Lap) componentwise on a cell tensor
  field, conjugate gradients.
* solve_helmholtz_velocity: (I - coef*Lap) on MAC face velocities with the
  slip/no-slip ghost relations folded into the operator.

Every solver returns its input bitwise-unchanged paths for zero work: a
zero right-hand side (or an initial residual that is exactly zero) must
not launch an iteration, so a quiescent state stays quiescent to the last
bit.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import grid as _g
from .errors import SolverDivergence

_SMOOTH_PRE = 3
_SMOOTH_POST = 3
_COARSE_SWEEPS = 60


def _refresh_ghosts(qpad: np.ndarray, g: _g.Grid) -> None:
    """Re-fill the one-layer ghosts of a padded cell field in place."""
    for ax in range(3):
        n = qpad.shape[ax] - 2
        lo = _g._sl(ax, slice(0, 1), qpad.ndim)
        hi = _g._sl(ax, slice(n + 1, n + 2), qpad.ndim)
        if g.periodic_axis(ax):
            qpad[lo] = qpad[_g._sl(ax, slice(n, n + 1), qpad.ndim)]
            qpad[hi] = qpad[_g._sl(ax, slice(1, 2), qpad.ndim)]
        else:
            qpad[lo] = qpad[_g._sl(ax, slice(1, 2), qpad.ndim)]
            qpad[hi] = qpad[_g._sl(ax, slice(n, n + 1), qpad.ndim)]


def _inv_h2(g: _g.Grid) -> tuple[float, float, float]:
    return (1.0 / g.hx ** 2, 1.0 / g.hy ** 2, 1.0 / g.hz ** 2)


def _smooth(phipad: np.ndarray, rhs: np.ndarray, g: _g.Grid,
            sweeps: int) -> None:
    ih = _inv_h2(g)
    for _ in range(sweeps):
        for color in (0, 1):
            if _g._snb is not None:
                _g._snb.redblack_sweep(phipad, rhs, *ih, color)
            else:
                _g._snp.redblack_sweep(phipad, rhs, *ih, color)
            _refresh_ghosts(phipad, g)


def _residual(phipad: np.ndarray, rhs: np.ndarray, g: _g.Grid) -> np.ndarray:
    return rhs - _g.laplacian_scalar(phipad, g)


def _coarsen_grid(g: _g.Grid) -> _g.Grid | None:
    can = [n % 2 == 0 and n >= 8 for n in g.shape]
    if not any(can):
        return None
    new = {}
    for name_n, name_h, n, h, c in zip(("nx", "ny", "nz"), ("hx", "hy", "hz"),
                                       g.shape, (g.hx, g.hy, g.hz), can):
        new[name_n] = n // 2 if c else n
        new[name_h] = h * 2.0 if c else h
    return dataclasses.replace(g, **new)


def _restrict(r: np.ndarray, fine: _g.Grid, coarse: _g.Grid) -> np.ndarray:
    factors = tuple(nf // nc for nf, nc in zip(fine.shape, coarse.shape))
    view = r.reshape(coarse.nx, factors[0], coarse.ny, factors[1],
                     coarse.nz, factors[2])
    return view.mean(axis=(1, 3, 5))


def _prolong(e: np.ndarray, fine: _g.Grid, coarse: _g.Grid) -> np.ndarray:
    """Cell-centered linear interpolation, one axis at a time.

    Children sit a quarter-cell to each side of the parent, so the weights
    are 3/4 parent + 1/4 nearest neighbor; constant transfer alone is too
    weak for the V-cycle to contract mesh-independently.
    """
    out = e
    for ax in range(3):
        if fine.shape[ax] == coarse.shape[ax]:
            continue
        mode = "wrap" if fine.periodic_axis(ax) else "edge"
        widths = [(0, 0)] * 3
        widths[ax] = (1, 1)
        padded = np.pad(out, widths, mode=mode)
        left = padded[_g._sl(ax, slice(0, -2))]
        right = padded[_g._sl(ax, slice(2, None))]
        lo = 0.75 * out + 0.25 * left
        hi = 0.75 * out + 0.25 * right
        out = np.stack((lo, hi), axis=ax + 1).reshape(
            tuple(2 * s if a == ax else s for a, s in enumerate(out.shape)))
    return out


def _vcycle(phipad: np.ndarray, rhs: np.ndarray, g: _g.Grid) -> None:
    coarse = _coarsen_grid(g)
    if coarse is None:
        _smooth(phipad, rhs, g, _COARSE_SWEEPS)
        return
    _smooth(phipad, rhs, g, _SMOOTH_PRE)
    rc = _restrict(_residual(phipad, rhs, g), g, coarse)
    epad = np.zeros((coarse.nx + 2, coarse.ny + 2, coarse.nz + 2))
    _vcycle(epad, rc, coarse)
    phipad[1:-1, 1:-1, 1:-1] += _prolong(epad[1:-1, 1:-1, 1:-1], g, coarse)
    _refresh_ghosts(phipad, g)
    _smooth(phipad, rhs, g, _SMOOTH_POST)


def _solve_poisson_fft(rhs: np.ndarray, g: _g.Grid) -> np.ndarray:
    sym = []
    for n, h in zip(g.shape, (g.hx, g.hy, g.hz)):
        k = np.arange(n)
        sym.append((2.0 * np.cos(2.0 * np.pi * k / n) - 2.0) / h ** 2)
    s = (sym[0][:, None, None] + sym[1][None, :, None]
         + sym[2][None, None, :])
    s[0, 0, 0] = 1.0
    hat = np.fft.fftn(rhs)
    hat[0, 0, 0] = 0.0
    hat /= s
    phi = np.fft.ifftn(hat).real
    return phi - phi.mean()


def solve_poisson(rhs: np.ndarray, g: _g.Grid, tol: float = 1e-10,
                  max_cycles: int = 60,
                  stats: dict | None = None) -> np.ndarray:
    """Solve Lap(phi) = rhs with the grid's tags; phi returned mean-zero.

    The mean of rhs is projected out first: with pinned or periodic normal
    fluxes the continuous problem is only solvable for mean-zero data, and
    discrete roundoff in the divergence otherwise accumulates in the
    nullspace direction.  stats, if given, receives {"cycles": n} (0 for
    the direct spectral path).
    """
    if stats is not None:
        stats["cycles"] = 0
    if not np.any(rhs):
        return np.zeros_like(rhs)
    rhs = rhs - rhs.mean()
    if g.all_periodic:
        return _solve_poisson_fft(rhs, g)
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)
    phipad = np.zeros((g.nx + 2, g.ny + 2, g.nz + 2))
    for cycle in range(1, max_cycles + 1):
        _vcycle(phipad, rhs, g)
        res = float(np.linalg.norm(_residual(phipad, rhs, g)))
        if res <= tol * rhs_norm:
            if stats is not None:
                stats["cycles"] = cycle
            phi = phipad[1:-1, 1:-1, 1:-1].copy()
            return phi - phi.mean()
    raise SolverDivergence(
        f"pressure solve stalled: relative residual {res / rhs_norm:.3e} "
        f"after {max_cycles} V-cycles")


def solve_helmholtz_tensor(rhs6: np.ndarray, g: _g.Grid, coef: float,
                           tol: float = 1e-12,
                           max_iter: int = 400) -> np.ndarray:
    """Solve (I - coef*Lap) b = rhs componentwise, zero-flux/periodic BCs."""
    if coef == 0.0:
        return rhs6.copy()

    def apply_op(x6):
        return x6 - coef * _g.laplacian_tensor(_g.pad_sym6(x6, g, 1), g)

    x = rhs6.copy()
    r = rhs6 - apply_op(x)
    rr = float(np.vdot(r, r).real)
    if rr == 0.0:
        return x
    rhs_norm2 = float(np.vdot(rhs6, rhs6).real)
    target2 = (tol ** 2) * max(rhs_norm2, 1e-300)
    p = r.copy()
    for _ in range(max_iter):
        ap = apply_op(p)
        alpha = rr / float(np.vdot(p, ap).real)
        x += alpha * p
        r -= alpha * ap
        rr_new = float(np.vdot(r, r).real)
        if rr_new <= target2:
            return x
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise SolverDivergence(
        f"tensor diffusion solve stalled: residual {np.sqrt(rr):.3e} "
        f"after {max_iter} CG iterations")


def _face_masks(g: _g.Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """1.0 on owned degrees of freedom, 0.0 on pinned walls and on the
    duplicated periodic twin face."""
    masks = []
    for ax, shape in enumerate(((g.nx + 1, g.ny, g.nz),
                                (g.nx, g.ny + 1, g.nz),
                                (g.nx, g.ny, g.nz + 1))):
        m = np.ones(shape)
        last = _g._sl(ax, slice(-1, None))
        m[last] = 0.0
        if not g.periodic_axis(ax):
            m[_g._sl(ax, slice(0, 1))] = 0.0
        masks.append(m)
    return tuple(masks)


def _sync_owned(vel: _g.VelocityField, g: _g.Grid) -> None:
    _g.enforce_normal_bc(vel, g)


def solve_helmholtz_velocity(rhs_vel: _g.VelocityField, g: _g.Grid,
                             coef: float, p, b6: np.ndarray | None = None,
                             wall_speed=None, tol: float = 1e-12,
                             max_iter: int = 400) -> _g.VelocityField:
    """Solve (I - coef*Lap) v = rhs on faces with slip/no-slip ghosts.

    The ghost fill is affine in v (wall velocity and elastic traction are
    data), so the solve splits into a linear operator with homogeneous
    ghosts plus a right-hand-side correction coef*Lap applied to the
    affine part alone.  Wall-pinned faces and periodic twin faces are not
    unknowns; they are re-imposed after every update.
    """
    if coef == 0.0:
        out = rhs_vel.copy()
        _sync_owned(out, g)
        return out
    masks = _face_masks(g)

    def face_lap(vel):
        pv = _g.apply_navier_slip(vel, None, p, g, homogeneous=True)
        return tuple(_g._snp.laplacian_scalar(c, *_inv_h2(g))
                     for c in (pv.u, pv.v, pv.w))

    def apply_op(vel):
        lap = face_lap(vel)
        out = _g.VelocityField(*(c - coef * l
                                 for c, l in zip((vel.u, vel.v, vel.w), lap)))
        _sync_owned(out, g)
        return out

    # affine correction: operator applied to the zero field picks up only
    # the wall data (wall speed, elastic traction)
    zero = _g.VelocityField.zeros(g)
    pz = _g.apply_navier_slip(zero, b6, p, g, wall_speed=wall_speed)
    corr = tuple(_g._snp.laplacian_scalar(c, *_inv_h2(g))
                 for c in (pz.u, pz.v, pz.w))
    rhs = rhs_vel.copy()
    _sync_owned(rhs, g)
    if any(np.any(c) for c in corr):
        rhs = _g.VelocityField(rhs.u + coef * corr[0],
                               rhs.v + coef * corr[1],
                               rhs.w + coef * corr[2])
        _sync_owned(rhs, g)

    def dot(a, b):
        return (float(np.vdot(a.u * masks[0], b.u))
                + float(np.vdot(a.v * masks[1], b.v))
                + float(np.vdot(a.w * masks[2], b.w)))

    def axpy(y, alpha, x):
        y.u += alpha * x.u
        y.v += alpha * x.v
        y.w += alpha * x.w
        _sync_owned(y, g)

    x = rhs.copy()
    ax0 = apply_op(x)
    r = _g.VelocityField(rhs.u - ax0.u, rhs.v - ax0.v, rhs.w - ax0.w)
    for m, c in zip(masks, (r.u, r.v, r.w)):
        c *= m
    rr = dot(r, r)
    if rr == 0.0:
        return x
    rhs_norm2 = dot(rhs, rhs)
    target2 = (tol ** 2) * max(rhs_norm2, 1e-300)
    pdir = r.copy()
    for _ in range(max_iter):
        apv = apply_op(pdir)
        for m, c in zip(masks, (apv.u, apv.v, apv.w)):
            c *= m
        alpha = rr / dot(pdir, apv)
        axpy(x, alpha, pdir)
        axpy(r, -alpha, apv)
        for m, c in zip(masks, (r.u, r.v, r.w)):
            c *= m
        rr_new = dot(r, r)
        if rr_new <= target2:
            return x
        beta = rr_new / rr
        pdir = _g.VelocityField(r.u + beta * pdir.u, r.v + beta * pdir.v,
                                r.w + beta * pdir.w)
        rr = rr_new
    raise SolverDivergence(
        f"viscous solve stalled: residual {np.sqrt(rr):.3e} "
        f"after {max_iter} CG iterations")


def pressure_project(vel: _g.VelocityField, g: _g.Grid, dt: float,
                     tol: float = 1e-10,
                     stats: dict | None = None) -> tuple[_g.VelocityField,
                                                         np.ndarray]:
    """Project v onto the discretely divergence-free space.

    Solves Lap(phi) = div(v)/dt and subtracts dt*grad(phi) from the faces,
    modifying vel in place (and returning it alongside phi, the pressure
    increment).  A field that is already exactly divergence free passes
    through bitwise.
    """
    _g.enforce_normal_bc(vel, g)
    div = _g.divergence(vel, g)
    if not np.any(div):
        if stats is not None:
            stats["cycles"] = 0
        return vel, np.zeros(g.shape)
    phi = solve_poisson(div / dt, g, tol=tol, stats=stats)
    vel = _g.subtract_pressure_gradient(vel, phi, g, dt)
    return vel, phi
