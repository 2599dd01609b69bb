import numpy as np
import viscoflow.grid as G
import viscoflow.stepper as st
import viscoflow.energy as en
import viscoflow.constitutive as con
import viscoflow.spd_algebra as sa

def tg_state(n, amp=1.0):
    g = G.Grid.periodic_box(n, 1.0)
    p = con.ModelParams(nu=0.02, mu=0.1, lambda_diff=0.01, delta1=1.0)
    x = np.arange(g.nx + 1) * g.hx
    xc = (np.arange(g.nx) + 0.5) * g.hx
    yc = (np.arange(g.ny) + 0.5) * g.hy
    yf = np.arange(g.ny + 1) * g.hy
    tp = 2 * np.pi
    v0 = G.VelocityField.zeros(g)
    v0.u[:] = amp * np.sin(tp * x)[:, None, None] * np.cos(tp * yc)[None, :, None]
    v0.v[:] = -amp * np.cos(tp * xc)[:, None, None] * np.sin(tp * yf)[None, :, None]
    b = np.tile(sa.IDENT6, g.shape + (1,))
    return st.init_state(v0, b, p, g)

def kin_face(vel, g):
    return 0.5 * g.cell_volume * float(
        np.sum(vel.u[:-1] ** 2) + np.sum(vel.v[:, :-1] ** 2)
        + np.sum(vel.w[:, :, :-1] ** 2))

def visc_edge(s, g, p):
    pv = G.apply_navier_slip(s.vel, s.b6, p, g)
    hs = (g.hx, g.hy, g.hz)
    # diagonal at cells
    acc = np.sum(((s.vel.u[1:] - s.vel.u[:-1]) / g.hx) ** 2)
    acc += np.sum(((s.vel.v[:, 1:] - s.vel.v[:, :-1]) / g.hy) ** 2)
    acc += np.sum(((s.vel.w[:, :, 1:] - s.vel.w[:, :, :-1]) / g.hz) ** 2)
    # off-diagonals at edges; unique edges i,j in 0..n-1 (periodic)
    comps = (pv.u, pv.v, pv.w)
    for (ca, cb) in ((0, 1), (0, 2), (1, 2)):
        A, B = comps[ca], comps[cb]
        # d v_ca / d x_cb at edge: difference A along cb
        sl_hi = [slice(1, -2)] * 3
        sl_lo = [slice(1, -2)] * 3
        sl_hi[cb] = slice(1, -1); sl_lo[cb] = slice(0, -2)
        # own-axis of A: faces 0..n-1 -> padded idx 1..n
        sl_hi[ca] = slice(1, -2); sl_lo[ca] = slice(1, -2)
        oth = 3 - ca - cb
        sl_hi[oth] = slice(1, -1); sl_lo[oth] = slice(1, -1)
        dA = (A[tuple(sl_hi)] - A[tuple(sl_lo)]) / hs[cb]
        sl_hi = [slice(None)] * 3; sl_lo = [slice(None)] * 3
        sl_hi[ca] = slice(1, -1); sl_lo[ca] = slice(0, -2)
        sl_hi[cb] = slice(1, -2); sl_lo[cb] = slice(1, -2)
        sl_hi[oth] = slice(1, -1); sl_lo[oth] = slice(1, -1)
        dB = (B[tuple(sl_hi)] - B[tuple(sl_lo)]) / hs[ca]
        dxy = 0.5 * (dA + dB)
        acc += 2.0 * np.sum(dxy ** 2)
    return 2.0 * p.nu * float(acc) * g.cell_volume

def resid(n, dt, T, kin_mode, visc_mode):
    s = tg_state(n)
    g, p = s.grid, s.params
    def budget(s):
        b = en.compute_budget(s)
        kin = kin_face(s.vel, g) if kin_mode == "face" else b.kinetic
        visc = visc_edge(s, g, p) if visc_mode == "edge" else b.viscous_diss
        return kin, visc, b
    rows = [budget(s)]
    for _ in range(int(round(T / dt))):
        s, _ = st.step(s, dt, advect="centered")
        rows.append(budget(s))
    E = np.array([k + b.free_energy for k, v, b in rows])
    D = np.array([v + b.total_dissipation - b.viscous_diss for k, v, b in rows])
    sig = (E - E[0]) + dt * np.concatenate(([0.0], np.cumsum(D[1:])))
    return np.abs(sig).max()

# skewness of advect_velocity under face inner product
s = tg_state(16)
g = s.grid
pv = G.apply_navier_slip(s.vel, s.b6, s.params, g)
au, av, aw = G.advect_velocity(pv, s.vel, g)
ip = (np.sum(au[:-1] * s.vel.u[:-1]) + np.sum(av[:, :-1] * s.vel.v[:, :-1])
      + np.sum(aw[:, :, :-1] * s.vel.w[:, :, :-1])) * g.cell_volume
print("face <adv v, v>:", ip, " (scale", float(np.abs(au).max()), ")")

T = 0.1
for km, vm in (("center", "cell"), ("face", "cell"), ("center", "edge"),
               ("face", "edge")):
    vals = [resid(16, dt, T, km, vm) for dt in (8e-3, 4e-3, 2e-3)]
    print(f"kin={km:6s} visc={vm:4s}:", ["%.3e" % v for v in vals],
          "ratios:", ["%.2f" % (vals[i] / vals[i+1]) for i in range(2)])
