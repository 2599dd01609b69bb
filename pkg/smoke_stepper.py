import dataclasses
import numpy as np

import viscoflow.grid as G
import viscoflow.stepper as st
import viscoflow.energy as en
import viscoflow.constitutive as con
import viscoflow.spd_algebra as sa
from viscoflow.backend import BACKEND

print("lane:", BACKEND)

# ---- 1. rest state: bitwise frozen through run(), budget all zero ----
g = G.Grid.periodic_box(8, 1.0)
p = con.ModelParams()
b0 = np.tile(sa.IDENT6, g.shape + (1,))
s0 = st.init_state(G.VelocityField.zeros(g), b0, p, g)
sN, reports = st.run(s0, t_end=0.2, dt=0.01)
same = (np.array_equal(sN.vel.u, s0.vel.u) and np.array_equal(sN.vel.v, s0.vel.v)
        and np.array_equal(sN.vel.w, s0.vel.w) and np.array_equal(sN.b6, s0.b6))
print("rest bitwise over", len(reports), "steps:", same)
bud = en.compute_budget(sN)
zero = all(getattr(bud, f.name) == 0.0 for f in dataclasses.fields(bud))
print("rest budget all zero:", zero, bud)

# ---- 2. relax_diss_1 oracle + uniform-B diff terms ----
p2 = con.ModelParams(gamma=0.0, classical_ob=True, delta1=1.0, mu=1.0)
b2 = np.tile(np.array([2.0, 1.0, 1.0, 0.0, 0.0, 0.0]), g.shape + (1,))
s2 = st.init_state(G.VelocityField.zeros(g), b2, p2, g)
bud2 = en.compute_budget(s2)
print("relax1:", bud2.relax_diss_1, "(expect 0.5)   relax2:", bud2.relax_diss_2,
      "relax3:", bud2.relax_diss_3)
print("diff terms (expect 0 0):", bud2.diff_diss_gamma, bud2.diff_diss_inv)
print("free_energy:", bud2.free_energy)

# ---- 3. corrotational shear, a=0: |B|_F conserved to O(dt^2)/step ----
def shear_state(gamma_dot, a_param, nx=8, ny=16, delta1=0.0):
    gg = G.Grid.channel(nx, ny, 1.0, wall="no_slip")
    pp = con.ModelParams(a=a_param, delta1=delta1, delta2=0.0,
                         classical_ob=True, gamma=0.0)
    v0 = G.VelocityField.zeros(gg)
    yc = (np.arange(gg.ny) + 0.5) * gg.hy
    v0.u[:] = gamma_dot * yc[None, :, None]
    bfull = np.array([[2.0, 0.5, 0.3], [0.5, 1.5, 0.2], [0.3, 0.2, 1.0]])
    b = np.tile(sa.from_full(bfull), gg.shape + (1,))
    ws = {"ylo": (0.0, 0.0, 0.0), "yhi": (gamma_dot * 1.0, 0.0, 0.0)}
    return st.init_state(v0, b, pp, gg), ws

def frob_drift(dt, nsteps, a_param=0.0):
    s, ws = shear_state(-0.7, a_param)
    f0 = float(sa.frob_norm(s.b6[0, 0, 0]))
    v_u0 = s.vel.u.copy()
    for _ in range(nsteps):
        s, rep = st.step(s, dt, wall_speed=ws)
    vel_frozen = np.array_equal(s.vel.u, v_u0)
    uni = float(np.abs(s.b6 - s.b6[0:1, 0:1, 0:1]).max())
    return abs(float(sa.frob_norm(s.b6[0, 0, 0])) - f0), vel_frozen, uni

d1, vf1, u1 = frob_drift(0.02, 10)
d2, vf2, u2 = frob_drift(0.01, 20)
print("corrot drift dt=2e-2:", d1, "dt=1e-2:", d2, "ratio:", d1 / d2,
      "(expect ~2: N*dt^2 halves)")
print("velocity exactly frozen:", vf1, vf2, "B stays uniform:", u1, u2)

# ---- 4. shear ODE oracle vs RK4 ----
def rk4_reference(gamma_dot, delta1, T, dt):
    Gm = np.zeros((3, 3)); Gm[0, 1] = gamma_dot
    def rhs(B):
        return Gm @ B + B @ Gm.T - delta1 * (B - np.eye(3))
    B = sa.to_full(sa.from_full(np.array([[2.0, 0.5, 0.3],
                                          [0.5, 1.5, 0.2],
                                          [0.3, 0.2, 1.0]])))
    n = int(round(T / dt))
    for _ in range(n):
        k1 = rhs(B); k2 = rhs(B + 0.5 * dt * k1)
        k3 = rhs(B + 0.5 * dt * k2); k4 = rhs(B + dt * k3)
        B = B + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return B

def shear_run(dt, T, gamma_dot=0.8, delta1=1.0):
    s, ws = shear_state(gamma_dot, 1.0, delta1=delta1)
    n = int(round(T / dt))
    for _ in range(n):
        s, rep = st.step(s, dt, wall_speed=ws)
    return sa.to_full(s.b6[0, 0, 0])

Bref = rk4_reference(0.8, 1.0, 0.5, 1e-4)
e1 = np.abs(shear_run(2e-3, 0.5) - Bref).max()
e2 = np.abs(shear_run(1e-3, 0.5) - Bref).max()
print("shear ODE err dt=2e-3:", e1, "dt=1e-3:", e2, "ratio:", e1 / e2)

# ---- 5. energy decay on a TG-like periodic run + budget residual ----
gT = G.Grid.periodic_box(16, 1.0)
pT = con.ModelParams(nu=0.02, mu=0.1, lambda_diff=0.01, delta1=1.0)
x = (np.arange(gT.nx + 1)) * gT.hx
yc = (np.arange(gT.ny) + 0.5) * gT.hy
v0 = G.VelocityField.zeros(gT)
two_pi = 2.0 * np.pi
v0.u[:] = (np.sin(two_pi * x)[:, None, None]
           * np.cos(two_pi * yc)[None, :, None])
xc = (np.arange(gT.nx) + 0.5) * gT.hx
yf = np.arange(gT.ny + 1) * gT.hy
v0.v[:] = (-np.cos(two_pi * xc)[:, None, None]
           * np.sin(two_pi * yf)[None, :, None])
bT = np.tile(sa.IDENT6, gT.shape + (1,))
bT[..., 0] += 0.3 * np.sin(two_pi * xc)[:, None, None] ** 2
sT = st.init_state(v0, bT, pT, gT)

def energy_series(dt, n):
    s = sT.copy()
    buds = [en.compute_budget(s)]
    for _ in range(n):
        s, rep = st.step(s, dt, advect="centered")
        buds.append(en.compute_budget(s))
    return buds

dt = 2e-3
buds = energy_series(dt, 25)
E = np.array([b.total_energy for b in buds])
dE = np.diff(E)
print("max energy increase per step:", dE.max(), "(expect <= ~C*dt^2)")
sig, pos = en.budget_residual(buds, dt)
buds_h = energy_series(dt / 2, 50)
sig_h, pos_h = en.budget_residual(buds_h, dt / 2)
r1 = np.abs(sig).max(); r2 = np.abs(sig_h).max()
print("budget residual max:", r1, "halved-dt:", r2, "ratio:", r1 / r2)

# ---- 6. weak residual sanity ----
phi = G.VelocityField.zeros(g)
r_rest = en.weak_residual(s0, sN, phi)
print("weak residual, rest + zero test:", r_rest)
aI = np.tile(sa.IDENT6, g.shape + (1,))
# rest tensor test
s0b, _ = st.step(s0, 0.01)
r_tens = en.weak_residual(s0, s0b, aI)
print("weak residual, rest + identity tensor test:", r_tens)

# ---- 7. positivity report ----
rep = en.positivity_report(sN.b6)
print("positivity:", rep.min_lambda, rep.argmin_cell, rep.min_det)
try:
    en.positivity_report(sN.b6 * 0.5 + 0, eps=0.9)
except Exception as ex:
    print("eps floor raise:", type(ex).__name__)
