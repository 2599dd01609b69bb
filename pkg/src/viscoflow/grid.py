"""Staggered-grid fields, boundary conditions, and discrete operators.

Layout: the box (0, Lx) x (0, Ly) x (0, Lz) is split into nx*ny*nz cells.
The conformation tensor and pressure live at cell centers; velocity lives
on cell faces (MAC layout), the x component on x-faces and so on.  This
pairing gives a divergence/gradient adjoint pair, which the energy
bookkeeping leans on.

Boundary conditions are per-face tags: periodic, navier_slip (tangential
traction balanced by wall friction sigma), or no_slip.  A direction may
also be collapsed to a single periodic cell layer, which turns the solver
into a 2D slab code with zero derivatives along that axis.

Ghost handling: operators consume pre-padded arrays.  `pad_scalar` /
`pad_sym6` build cell-field ghosts (periodic wrap or zero normal
derivative), `apply_navier_slip` builds the velocity ghost planes that
encode v.n = 0 plus the tangential slip/no-slip relations.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from . import _stencil_numpy as _snp
from . import constitutive as _con
from .backend import NUMBA_ENABLED
from .errors import ValidationError

if NUMBA_ENABLED:
    from . import _stencil_numba as _snb
else:
    _snb = None

FACES = ("xlo", "xhi", "ylo", "yhi", "zlo", "zhi")
BC_KINDS = ("periodic", "navier_slip", "no_slip")


@dataclasses.dataclass(frozen=True)
class Grid:
    """Cell counts, spacings, and the six face tags.

    A resolved direction needs at least 4 cells; a direction with exactly
    one cell must be periodic (slab mode) and drops out of every stencil.
    """

    nx: int
    ny: int
    nz: int
    hx: float
    hy: float
    hz: float
    bc: tuple[str, str, str, str, str, str] = ("periodic",) * 6

    def __post_init__(self):
        counts = (self.nx, self.ny, self.nz)
        for name, n in zip(("nx", "ny", "nz"), counts):
            if not isinstance(n, int) or (n != 1 and n < 4):
                raise ValidationError(
                    name, "cell count must be 1 (unresolved) or >= 4")
        for name, h in zip(("hx", "hy", "hz"), (self.hx, self.hy, self.hz)):
            if not (isinstance(h, (int, float)) and np.isfinite(h) and h > 0):
                raise ValidationError(name, "spacing must be a finite number > 0")
            object.__setattr__(self, name, float(h))
        if len(self.bc) != 6:
            raise ValidationError("bc", "needs six face tags " + str(FACES))
        object.__setattr__(self, "bc", tuple(self.bc))
        for face, tag in zip(FACES, self.bc):
            if tag not in BC_KINDS:
                raise ValidationError(face, f"unknown boundary tag {tag!r}")
        for ax in range(3):
            lo, hi = self.bc[2 * ax], self.bc[2 * ax + 1]
            if (lo == "periodic") != (hi == "periodic"):
                raise ValidationError(
                    FACES[2 * ax], "periodic faces must come in axis pairs")
            if counts[ax] == 1 and lo != "periodic":
                raise ValidationError(
                    FACES[2 * ax], "single-cell directions must be periodic")

    @classmethod
    def periodic_box(cls, n: int, length: float = 1.0) -> "Grid":
        h = length / n
        return cls(n, n, n, h, h, h)

    @classmethod
    def channel(cls, nx: int, ny: int, ly: float = 1.0,
                wall: str = "navier_slip") -> "Grid":
        """Periodic in x and z (z collapsed), walls at ylo/yhi."""
        h = ly / ny
        return cls(nx, ny, 1, h, h, h,
                   ("periodic", "periodic", wall, wall, "periodic", "periodic"))

    def periodic_axis(self, ax: int) -> bool:
        return self.bc[2 * ax] == "periodic"

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def lengths(self) -> tuple[float, float, float]:
        return (self.nx * self.hx, self.ny * self.hy, self.nz * self.hz)

    @property
    def cell_volume(self) -> float:
        return self.hx * self.hy * self.hz

    @property
    def all_periodic(self) -> bool:
        return all(self.periodic_axis(ax) for ax in range(3))

    @property
    def min_spacing(self) -> float:
        hs = [h for n, h in zip(self.shape, (self.hx, self.hy, self.hz))
              if n > 1]
        return min(hs) if hs else self.hx


@dataclasses.dataclass
class VelocityField:
    """Face-normal velocity components on the MAC layout.

    u: (nx+1, ny, nz) on x-faces; v: (nx, ny+1, nz); w: (nx, ny, nz+1).
    The duplicate face of a periodic direction (u[nx] vs u[0]) is kept in
    sync by enforce_normal_bc.
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray

    @classmethod
    def zeros(cls, g: Grid) -> "VelocityField":
        return cls(np.zeros((g.nx + 1, g.ny, g.nz)),
                   np.zeros((g.nx, g.ny + 1, g.nz)),
                   np.zeros((g.nx, g.ny, g.nz + 1)))

    def copy(self) -> "VelocityField":
        return VelocityField(self.u.copy(), self.v.copy(), self.w.copy())

    def max_speed(self) -> float:
        return max(float(np.max(np.abs(self.u))),
                   float(np.max(np.abs(self.v))),
                   float(np.max(np.abs(self.w))))


@dataclasses.dataclass
class PaddedVelocity:
    """Velocity components with one ghost layer in every direction.

    u: (nx+3, ny+2, nz+2) covering faces -1..nx+1; likewise v, w.  Built by
    apply_navier_slip; consumed by gradient/advection stencils.
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray


def enforce_normal_bc(vel: VelocityField, g: Grid) -> VelocityField:
    """Pin wall-normal components to exactly 0 and sync periodic twins."""
    for ax, comp in enumerate((vel.u, vel.v, vel.w)):
        if g.periodic_axis(ax):
            idx_last = [slice(None)] * 3
            idx_first = [slice(None)] * 3
            idx_last[ax] = -1
            idx_first[ax] = 0
            comp[tuple(idx_last)] = comp[tuple(idx_first)]
        else:
            idx = [slice(None)] * 3
            idx[ax] = 0
            comp[tuple(idx)] = 0.0
            idx[ax] = -1
            comp[tuple(idx)] = 0.0
    return vel


def _wrap_ghosts(out: np.ndarray, ax: int, layers: int, n: int) -> None:
    sl = [slice(None)] * out.ndim
    lo, lo_src, hi, hi_src = list(sl), list(sl), list(sl), list(sl)
    lo[ax] = slice(0, layers)
    lo_src[ax] = slice(n, n + layers)
    hi[ax] = slice(layers + n, 2 * layers + n)
    hi_src[ax] = slice(layers, 2 * layers)
    out[tuple(lo)] = out[tuple(lo_src)]
    out[tuple(hi)] = out[tuple(hi_src)]


def _pad_cell_field(q: np.ndarray, g: Grid, layers: int) -> np.ndarray:
    spatial = [(layers, layers)] * 3
    extra = [(0, 0)] * (q.ndim - 3)
    # edge mode = zero normal derivative at walls; periodic axes rewrapped
    out = np.pad(q, spatial + extra, mode="edge")
    for ax in range(3):
        if g.periodic_axis(ax):
            _wrap_ghosts(out, ax, layers, q.shape[ax])
    return out


def pad_scalar(q: np.ndarray, g: Grid, layers: int = 1) -> np.ndarray:
    if q.shape != g.shape:
        raise ValidationError("field", "shape does not match the grid")
    return _pad_cell_field(q, g, layers)


def pad_sym6(b6: np.ndarray, g: Grid, layers: int = 1) -> np.ndarray:
    if b6.shape != g.shape + (6,):
        raise ValidationError("field", "shape does not match the grid")
    return _pad_cell_field(b6, g, layers)


# face index of the tangential stress component coupling velocity component
# `comp` across a wall with normal axis `ax` (packed order xx,yy,zz,xy,xz,yz)
_SHEAR_IDX = {(0, 1): 3, (0, 2): 4, (1, 0): 3, (1, 2): 5, (2, 0): 4, (2, 1): 5}


def _axis_avg_pairs(arr: np.ndarray, ax: int) -> np.ndarray:
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim
    lo[ax] = slice(0, -1)
    hi[ax] = slice(1, None)
    return 0.5 * (arr[tuple(lo)] + arr[tuple(hi)])


def _wall_plane(arr: np.ndarray, ax: int, side: int, depth: int) -> np.ndarray:
    idx = [slice(None)] * arr.ndim
    idx[ax] = depth if side == 0 else arr.shape[ax] - 1 - depth
    return arr[tuple(idx)]


def apply_navier_slip(vel: VelocityField, b6: np.ndarray | None,
                      p: "_con.ModelParams", g: Grid,
                      wall_speed: dict[str, tuple[float, float, float]] | None
                      = None, homogeneous: bool = False) -> PaddedVelocity:
    """Fill all velocity ghost layers for the active boundary tags.

    Wall-normal components: 0 on the wall face, odd reflection beyond it.
    Tangential components at navier_slip walls satisfy the discrete
    traction balance nu du/dn + E = sigma (u_wall - V) with E the elastic
    shear traction 2 a mu S(B) extrapolated to the wall (one-sided, second
    order); no_slip is the sigma -> infinity limit (mirror around V).

    homogeneous=True drops the wall velocity and the elastic traction, which
    makes the fill linear in the velocity (the implicit solve needs that).
    """
    wall_speed = {} if homogeneous else (wall_speed or {})
    enforce_normal_bc(vel, g)
    # elastic shear traction needs S(B) at cells; skip when it cannot act
    s6 = None
    if (not homogeneous and b6 is not None and p.a != 0.0 and p.mu != 0.0
            and not g.all_periodic):
        s6 = 2.0 * p.a * p.mu * _con.stress_S(b6, p)

    comps = (vel.u, vel.v, vel.w)
    pads = []
    for comp_ax, arr in enumerate(comps):
        pad_widths = [(1, 1)] * 3
        out = np.pad(arr, pad_widths, mode="edge")
        # own axis first: face arrays wrap with an offset of one face
        ax = comp_ax
        if g.periodic_axis(ax):
            n_face = arr.shape[ax]  # n+1 stored faces, last == first
            sl = [slice(None)] * 3
            lo, lo_src, hi, hi_src = list(sl), list(sl), list(sl), list(sl)
            lo[ax] = 0
            lo_src[ax] = n_face - 1  # face n-1 (stored idx without pad) ...
            hi[ax] = n_face + 1
            hi_src[ax] = 2
            out[tuple(lo)] = out[tuple(lo_src)]
            out[tuple(hi)] = out[tuple(hi_src)]
        else:
            sl = [slice(None)] * 3
            lo, lo_src, hi, hi_src = list(sl), list(sl), list(sl), list(sl)
            lo[ax] = 0
            lo_src[ax] = 2
            hi[ax] = out.shape[ax] - 1
            hi_src[ax] = out.shape[ax] - 3
            out[tuple(lo)] = -out[tuple(lo_src)]
            out[tuple(hi)] = -out[tuple(hi_src)]
        # tangential axes
        for ax in range(3):
            if ax == comp_ax:
                continue
            if g.periodic_axis(ax):
                n = arr.shape[ax]
                sl = [slice(None)] * 3
                lo, lo_src, hi, hi_src = list(sl), list(sl), list(sl), list(sl)
                lo[ax] = 0
                lo_src[ax] = n
                hi[ax] = n + 1
                hi_src[ax] = 1
                out[tuple(lo)] = out[tuple(lo_src)]
                out[tuple(hi)] = out[tuple(hi_src)]
                continue
            h = (g.hx, g.hy, g.hz)[ax]
            for side in (0, 1):
                face = FACES[2 * ax + side]
                tag = g.bc[2 * ax + side]
                v_wall = wall_speed.get(face, (0.0, 0.0, 0.0))[comp_ax]
                inner = _wall_plane(out, ax, side, 1)
                if tag == "no_slip":
                    ghost = 2.0 * v_wall - inner
                else:
                    elast = 0.0
                    if s6 is not None:
                        comp_idx = _SHEAR_IDX[(comp_ax, ax)]
                        w0 = _wall_plane(s6[..., comp_idx], ax, side, 0)
                        w1 = _wall_plane(s6[..., comp_idx], ax, side, 1)
                        sw = 1.5 * w0 - 0.5 * w1  # one-sided, second order
                        # cell plane -> the ghost plane extent: pad first so
                        # the cell-to-face average also covers the ghost
                        # faces (and survives collapsed single-cell axes)
                        pax = comp_ax if comp_ax < ax else comp_ax - 1
                        oax3 = 3 - comp_ax - ax
                        widths = [(0, 0), (0, 0)]
                        widths[pax] = (2, 2)
                        mode = ("wrap" if g.periodic_axis(comp_ax)
                                else "edge")
                        elast = _axis_avg_pairs(np.pad(sw, widths, mode=mode),
                                                pax)
                        widths = [(0, 0), (0, 0)]
                        widths[1 - pax] = (1, 1)
                        mode = "wrap" if g.periodic_axis(oax3) else "edge"
                        elast = np.pad(elast, widths, mode=mode)
                        if side == 1:
                            elast = -elast
                    alpha = p.nu / h
                    denom = alpha + 0.5 * p.sigma
                    ghost = (inner * (alpha - 0.5 * p.sigma)
                             + p.sigma * v_wall + elast) / denom
                idx = [slice(None)] * 3
                idx[ax] = 0 if side == 0 else out.shape[ax] - 1
                out[tuple(idx)] = ghost
        pads.append(out)
    return PaddedVelocity(*pads)


def divergence(vel: VelocityField, g: Grid) -> np.ndarray:
    if _snb is not None:
        out = np.empty(g.shape)
        _snb.divergence(vel.u, vel.v, vel.w,
                        1.0 / g.hx, 1.0 / g.hy, 1.0 / g.hz, out)
        return out
    return _snp.divergence(vel.u, vel.v, vel.w,
                           1.0 / g.hx, 1.0 / g.hy, 1.0 / g.hz)


def grad_velocity(pv: PaddedVelocity, g: Grid) -> np.ndarray:
    """Cell-centered full velocity gradient G[i, j] = d v_i / d x_j.

    Normal entries are exact staggered differences; shear entries average
    the two face-centered centered differences.  Exact on affine fields.
    """
    out = np.empty(g.shape + (3, 3))
    hs = (g.hx, g.hy, g.hz)
    for ci, arr in enumerate((pv.u, pv.v, pv.w)):
        own = [slice(1, -1)] * 3
        own[ci] = slice(1, -2)
        left = arr[tuple(own)]
        own[ci] = slice(2, -1)
        right = arr[tuple(own)]
        out[..., ci, ci] = (right - left) / hs[ci]
        for ax in range(3):
            if ax == ci:
                continue
            lo = [slice(1, -1)] * 3
            hi = [slice(1, -1)] * 3
            lo[ax] = slice(0, -2)
            hi[ax] = slice(2, None)
            lo[ci] = slice(1, -2)
            hi[ci] = slice(1, -2)
            dl = arr[tuple(hi)] - arr[tuple(lo)]
            lo[ci] = slice(2, -1)
            hi[ci] = slice(2, -1)
            dr = arr[tuple(hi)] - arr[tuple(lo)]
            out[..., ci, ax] = (dl + dr) / (4.0 * hs[ax])
    return out


def sym_antisym_split(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(D, W): symmetric part packed as sym6, antisymmetric part full."""
    d6 = np.empty(grad.shape[:-2] + (6,))
    d6[..., 0] = grad[..., 0, 0]
    d6[..., 1] = grad[..., 1, 1]
    d6[..., 2] = grad[..., 2, 2]
    d6[..., 3] = 0.5 * (grad[..., 0, 1] + grad[..., 1, 0])
    d6[..., 4] = 0.5 * (grad[..., 0, 2] + grad[..., 2, 0])
    d6[..., 5] = 0.5 * (grad[..., 1, 2] + grad[..., 2, 1])
    w = 0.5 * (grad - np.swapaxes(grad, -1, -2))
    return d6, w


def laplacian_tensor(bpad: np.ndarray, g: Grid) -> np.ndarray:
    inv = (1.0 / g.hx ** 2, 1.0 / g.hy ** 2, 1.0 / g.hz ** 2)
    if _snb is not None:
        out = np.empty((bpad.shape[0] - 2, bpad.shape[1] - 2,
                        bpad.shape[2] - 2, 6))
        _snb.laplacian_sym6(bpad, *inv, out)
        return out
    return _snp.laplacian_sym6(bpad, *inv)


def laplacian_scalar(qpad: np.ndarray, g: Grid) -> np.ndarray:
    inv = (1.0 / g.hx ** 2, 1.0 / g.hy ** 2, 1.0 / g.hz ** 2)
    if _snb is not None:
        out = np.empty((qpad.shape[0] - 2, qpad.shape[1] - 2,
                        qpad.shape[2] - 2))
        _snb.laplacian_scalar(qpad, *inv, out)
        return out
    return _snp.laplacian_scalar(qpad, *inv)


def advect_tensor(vel: VelocityField, bpad2: np.ndarray, g: Grid) -> np.ndarray:
    """(v . grad)B, upwind-biased with minmod-limited reconstruction.

    bpad2 needs two ghost layers.  Exactly zero for uniform B.
    """
    inv = (1.0 / g.hx, 1.0 / g.hy, 1.0 / g.hz)
    if _snb is not None:
        out = np.empty(g.shape + (6,))
        _snb.advect_sym6_muscl(vel.u, vel.v, vel.w, bpad2, *inv, out)
        return out
    return _snp.advect_sym6_muscl(vel.u, vel.v, vel.w, bpad2, *inv)


def advect_tensor_centered(vel: VelocityField, bpad: np.ndarray,
                           g: Grid) -> np.ndarray:
    """Centered-flux (v . grad)B; energy-neutral but not monotone.

    The limited scheme protects positivity in production runs; this
    variant keeps the budget bookkeeping free of upwinding dissipation
    and is what verification modes use.
    """
    inv = (1.0 / g.hx, 1.0 / g.hy, 1.0 / g.hz)
    if _snb is not None:
        out = np.empty(g.shape + (6,))
        _snb.advect_sym6_centered(vel.u, vel.v, vel.w, bpad, *inv, out)
        return out
    return _snp.advect_sym6_centered(vel.u, vel.v, vel.w, bpad, *inv)


def _pad_axis(q: np.ndarray, g: Grid, ax: int) -> np.ndarray:
    widths = [(0, 0)] * q.ndim
    widths[ax] = (1, 1)
    out = np.pad(q, widths, mode="edge")
    if g.periodic_axis(ax):
        _wrap_ghosts(out, ax, 1, q.shape[ax])
    return out


def _sl(ax: int, s: slice, ndim: int = 3) -> tuple:
    idx = [slice(None)] * ndim
    idx[ax] = s
    return tuple(idx)


def _pair_avg(a: np.ndarray, ax: int) -> np.ndarray:
    return 0.5 * (a[_sl(ax, slice(0, -1), a.ndim)]
                  + a[_sl(ax, slice(1, None), a.ndim)])


def _diff(a: np.ndarray, ax: int, inv_h: float) -> np.ndarray:
    return (a[_sl(ax, slice(1, None), a.ndim)]
            - a[_sl(ax, slice(0, -1), a.ndim)]) * inv_h


def advect_velocity(pv: PaddedVelocity, vel: VelocityField,
                    g: Grid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(v . grad)v at faces: centered dual-cell fluxes minus v div v.

    The flux-minus-dilation arrangement keeps the discrete transport term
    skew once the field is divergence free, so advection neither creates
    nor destroys kinetic energy beyond projection tolerance.
    """
    hs = (g.hx, g.hy, g.hz)
    div_c = divergence(vel, g)
    comps = (pv.u, pv.v, pv.w)
    outs = []
    for ci in range(3):
        own = comps[ci]
        # own-axis: flux (mean u)^2 at dual-cell centers, differenced back
        # to faces 0..n, then cut to the interior of the transverse axes
        centers = _pair_avg(own, ci)
        term = _diff(centers * centers, ci, 1.0 / hs[ci])
        for ax in range(3):
            if ax != ci:
                term = term[_sl(ax, slice(1, -1))]
        adv = term
        for ax in range(3):
            if ax == ci:
                continue
            axq = 3 - ci - ax
            # transverse velocity averaged onto the shared edge, own
            # component averaged along the transverse axis to match
            ve = _pair_avg(comps[ax], ci)[_sl(ax, slice(1, -1))]
            ub = _pair_avg(own[_sl(ci, slice(1, -1))], ax)
            term = _diff(ve * ub, ax, 1.0 / hs[ax])
            adv = adv + term[_sl(axq, slice(1, -1))]
        divf = _pair_avg(_pad_axis(div_c, g, ci), ci)
        adv = adv - (vel.u, vel.v, vel.w)[ci] * divf
        if g.periodic_axis(ci):
            adv[_sl(ci, slice(-1, None))] = adv[_sl(ci, slice(0, 1))]
        else:
            adv[_sl(ci, slice(0, 1))] = 0.0
            adv[_sl(ci, slice(-1, None))] = 0.0
        outs.append(adv)
    return tuple(outs)


def elastic_force(f6: np.ndarray, g: Grid) -> tuple[np.ndarray, np.ndarray,
                                                    np.ndarray]:
    """Face-centered divergence of a cell-centered symmetric tensor field.

    Normal derivative by direct face difference, shear derivatives through
    edge-averaged values; the discrete adjoint of grad_velocity, which is
    what makes the work exchange between the two equations cancel.
    """
    fp = pad_sym6(f6, g, 1)
    comp_of = {(0, 0): 0, (1, 1): 1, (2, 2): 2,
               (0, 1): 3, (1, 0): 3, (0, 2): 4, (2, 0): 4,
               (1, 2): 5, (2, 1): 5}
    hs = (g.hx, g.hy, g.hz)
    outs = []
    for ci in range(3):
        shape = list(g.shape)
        shape[ci] += 1
        out = np.zeros(shape)
        for ax in range(3):
            k = comp_of[(ci, ax)]
            if ax == ci:
                sel_lo = [slice(1, -1)] * 3
                sel_hi = [slice(1, -1)] * 3
                sel_lo[ax] = slice(0, -1)
                sel_hi[ax] = slice(1, None)
                out += (fp[tuple(sel_hi) + (k,)]
                        - fp[tuple(sel_lo) + (k,)]) / hs[ax]
            else:
                # average the 4 cells around each edge, then difference
                sel = [slice(1, -1)] * 3
                sel[ci] = slice(None)
                sel[ax] = slice(None)
                plane = fp[tuple(sel) + (k,)]
                e = _axis_avg_pairs(_axis_avg_pairs(plane, ci), ax)
                d_lo = [slice(None)] * 3
                d_hi = [slice(None)] * 3
                d_lo[ax] = slice(0, -1)
                d_hi[ax] = slice(1, None)
                out += (e[tuple(d_hi)] - e[tuple(d_lo)]) / hs[ax]
        outs.append(out)
    return tuple(outs)


def gradient_tensor(bpad: np.ndarray, g: Grid) -> np.ndarray:
    """Centered spatial partials of a cell tensor field: (..., 3, 6)."""
    out = np.empty(g.shape + (3, 6))
    hs = (g.hx, g.hy, g.hz)
    for ax in range(3):
        lo = [slice(1, -1)] * 3
        hi = [slice(1, -1)] * 3
        lo[ax] = slice(0, -2)
        hi[ax] = slice(2, None)
        out[..., ax, :] = (bpad[tuple(hi)] - bpad[tuple(lo)]) / (2.0 * hs[ax])
    return out


def center_velocity(vel: VelocityField, g: Grid) -> np.ndarray:
    """Average face components to cell centers: (nx, ny, nz, 3)."""
    out = np.empty(g.shape + (3,))
    out[..., 0] = 0.5 * (vel.u[:-1] + vel.u[1:])
    out[..., 1] = 0.5 * (vel.v[:, :-1] + vel.v[:, 1:])
    out[..., 2] = 0.5 * (vel.w[:, :, :-1] + vel.w[:, :, 1:])
    return out


def cell_integral(q: np.ndarray, g: Grid) -> float:
    return float(np.sum(q)) * g.cell_volume


def subtract_pressure_gradient(vel: VelocityField, phi: np.ndarray,
                               g: Grid, dt: float) -> VelocityField:
    """v <- v - dt grad(phi) on faces; wall-normal faces stay pinned."""
    pp = pad_scalar(phi, g, 1)
    hs = (g.hx, g.hy, g.hz)
    for ax, comp in enumerate((vel.u, vel.v, vel.w)):
        lo = [slice(1, -1)] * 3
        hi = [slice(1, -1)] * 3
        lo[ax] = slice(0, -1)
        hi[ax] = slice(1, None)
        gradp = (pp[tuple(hi)] - pp[tuple(lo)]) / hs[ax]
        comp -= dt * gradp
    enforce_normal_bc(vel, g)
    return vel
