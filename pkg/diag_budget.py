import numpy as np
import viscoflow.grid as G
import viscoflow.stepper as st
import viscoflow.energy as en
import viscoflow.constitutive as con
import viscoflow.spd_algebra as sa

def tg_state(n, amp=1.0, with_b=True):
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
    if with_b:
        b[..., 0] += 0.3 * np.sin(tp * xc)[:, None, None] ** 2
    return st.init_state(v0, b, p, g)

def resid(n, dt, T, with_b=True):
    s = tg_state(n, with_b=with_b)
    buds = [en.compute_budget(s)]
    for _ in range(int(round(T / dt))):
        s, _ = st.step(s, dt, advect="centered")
        buds.append(en.compute_budget(s))
    sig, _ = en.budget_residual(buds, dt)
    return np.abs(sig).max()

T = 0.1
for n in (16, 32):
    vals = [resid(n, dt, T) for dt in (8e-3, 4e-3, 2e-3)]
    print(f"n={n}: dt ladder 8/4/2e-3 ->", ["%.3e" % v for v in vals],
          "ratios:", ["%.2f" % (vals[i] / vals[i+1]) for i in range(2)])

# with B inert (identity everywhere): isolates kinetic/viscous part
for n in (16,):
    vals = [resid(n, dt, T, with_b=False) for dt in (8e-3, 4e-3, 2e-3)]
    print(f"n={n} B=I: ->", ["%.3e" % v for v in vals],
          "ratios:", ["%.2f" % (vals[i] / vals[i+1]) for i in range(2)])
