import numpy as np
import viscoflow.grid as G
import viscoflow.stepper as st
import viscoflow.energy as en
import viscoflow.constitutive as con
import viscoflow.spd_algebra as sa

def shear_decay_state(n, nu=1.0, sigma=1.0):
    g = G.Grid.channel(n, n, 1.0, wall="navier_slip")
    p = con.ModelParams(nu=nu, mu=1.0, lambda_diff=1.0, sigma=sigma,
                        delta1=1.0, gamma=0.5, a=1.0)
    v0 = G.VelocityField.zeros(g)
    yc = (np.arange(g.ny) + 0.5) * g.hy
    v0.u[:] = np.cos(np.pi * yc)[None, :, None]
    b = np.tile(sa.IDENT6, g.shape + (1,))
    return st.init_state(v0, b, p, g)

def resid(n, dt, T, advect="centered"):
    s = shear_decay_state(n)
    buds = [en.compute_budget(s)]
    emax_up = -1e30
    for _ in range(int(round(T / dt))):
        s, _ = st.step(s, dt, advect=advect)
        buds.append(en.compute_budget(s))
        emax_up = max(emax_up, buds[-1].total_energy - buds[-2].total_energy)
    sig, pos = en.budget_residual(buds, dt)
    return np.abs(sig).max(), pos.max(), emax_up

for n in (16, 32):
    rows = [resid(n, dt, 0.04) for dt in (4e-3, 2e-3, 1e-3)]
    print(f"n={n} |sig|max:", ["%.3e" % r[0] for r in rows],
          "ratios:", ["%.2f" % (rows[i][0] / rows[i+1][0]) for i in range(2)])
    print("   pos part:", ["%.3e" % r[1] for r in rows],
          "max dE:", ["%.2e" % r[2] for r in rows])

# muscl for comparison (expected to break halving via dt-independent limiter diffusion)
rows = [resid(16, dt, 0.04, advect="muscl") for dt in (4e-3, 2e-3, 1e-3)]
print("n=16 muscl:", ["%.3e" % r[0] for r in rows],
      "ratios:", ["%.2f" % (rows[i][0] / rows[i+1][0]) for i in range(2)])
