"""Command-line front end: run scenarios, verify, sweep, check identities.

Exit codes: 0 success, 2 configuration problems, 3 numerical failure
(positivity loss, solver divergence, CFL violation, inadmissible data),
4 identity violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import backend
from . import config as cfgmod
from . import constitutive as con
from . import energy as en
from . import mms
from . import output
from . import spd_algebra as sa
from . import stepper as st
from .errors import (CFLViolation, IdentityViolation,
                     InadmissibleInitialData, ParseError, PositivityLoss,
                     SingularMatrix, SolverDivergence, ValidationError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IDENTITY = 4

_NUMERICAL_ERRORS = (PositivityLoss, SolverDivergence, CFLViolation,
                     InadmissibleInitialData, SingularMatrix)


def _state_extrema(b6):
    return (float(sa.lambda_min(b6).min()), float(sa.det(b6).min()),
            float(sa.frob_norm(b6).max()))


def _simulate(cfg: cfgmod.SimConfig, out_dir: str):
    """March one scenario to t_end, writing energy.csv and a manifest.

    Returns (exit_code, final_state_or_None).  Budgets are computed every
    step so the residual accumulation is exact; rows are emitted at the
    configured cadence plus the final step.
    """
    output.ensure_out_dir(out_dir)
    g = cfg.grid()
    writer = output.EnergyWriter()
    err = None
    config_err = None
    s = None
    try:
        data = cfg.build_scenario(g)
        s = st.init_state(data.v0, data.b0, cfg.params, g)
        bud = en.compute_budget(s, None, wall_speed=data.wall_speed)
        lam, det, frob = _state_extrema(s.b6)
        writer.add(0, 0.0, bud, 0.0, 0, lam, det, frob)
        e0 = bud.total_energy
        acc = 0.0
        step_i = 0
        tiny = 1e-12 * max(1.0, cfg.t_end)
        while s.t < cfg.t_end - tiny:
            dt = min(cfg.dt,
                     st.dt_for_cfl(s.vel, g, cfg.cfl_cap, cfg.dt),
                     cfg.t_end - s.t)
            s, rep = st.step(s, dt, wall_speed=data.wall_speed,
                             advect=cfg.advect)
            step_i += 1
            bud = en.compute_budget(s, None, wall_speed=data.wall_speed)
            acc += dt * (bud.total_dissipation - bud.work)
            if (step_i % cfg.energy_every == 0
                    or s.t >= cfg.t_end - tiny):
                resid = bud.total_energy - e0 + acc
                row = dataclasses.replace(bud, residual=resid)
                writer.add(step_i, s.t, row, rep.cfl, rep.poisson_cycles,
                           rep.lam_min, rep.det_min, rep.frob_max)
            if cfg.snapshot_every and step_i % cfg.snapshot_every == 0:
                stem = os.path.join(out_dir, f"snapshot_{step_i:06d}")
                if cfg.snapshot_format == "vtk":
                    output.write_vtk(stem + ".vtk", s.vel, s.b6, g)
                else:
                    output.write_raw(stem + ".raw", s.vel, s.b6, g)
    except _NUMERICAL_ERRORS as ex:
        err = f"{type(ex).__name__}: {ex}"
    except (ParseError, ValidationError) as ex:
        err = f"{type(ex).__name__}: {ex}"
        config_err = ex
    writer.write(os.path.join(out_dir, "energy.csv"))
    output.write_manifest(os.path.join(out_dir, "manifest.txt"),
                          cfg, g, error=err)
    if config_err is not None:
        raise config_err
    if err is not None:
        print(err, file=sys.stderr)
        return EXIT_NUMERICAL, None
    return EXIT_OK, s


def run_scenario(cfg: cfgmod.SimConfig) -> int:
    code, _ = _simulate(cfg, cfg.out_dir)
    return code


def verify_mms(cfg: cfgmod.SimConfig) -> int:
    """Refinement studies against the manufactured solution."""
    if cfg.params.eps != 0.0:
        raise ValidationError("eps", "manufactured-solution verification "
                              "requires eps = 0 (cutoff inactive)")
    output.ensure_out_dir(cfg.out_dir)
    ns = (cfg.nx, 2 * cfg.nx, 4 * cfg.nx)
    spat = mms.spatial_ladder(ns=ns, dt=cfg.dt, t_end=cfg.t_end,
                              p=cfg.params, advect=cfg.advect)
    dts = (4 * cfg.dt, 2 * cfg.dt, cfg.dt)
    temp = mms.temporal_ladder(n=2 * cfg.nx, dts=dts,
                               t_end=max(cfg.t_end, 40 * cfg.dt),
                               p=cfg.params, advect=cfg.advect)
    lines = ["# manufactured-solution verification",
             f"spatial ladder n = {spat['ns']}"]
    for i, n in enumerate(spat["ns"]):
        lines.append(f"  n={n:4d}  err_v={spat['err_v'][i]:.6e}  "
                     f"err_b={spat['err_b'][i]:.6e}")
    lines.append(f"  observed spatial order v: "
                 + ", ".join(f"{o:.3f}" for o in spat["order_v"]))
    lines.append(f"  observed spatial order b: "
                 + ", ".join(f"{o:.3f}" for o in spat["order_b"]))
    lines.append(f"temporal ladder dt = {temp['dts']}")
    for i, d in enumerate(temp["dts"]):
        lines.append(f"  dt={d:.2e}  err_v={temp['err_v'][i]:.6e}  "
                     f"err_b={temp['err_b'][i]:.6e}")
    lines.append("  observed temporal order v (floor-cancelled): "
                 + ", ".join(f"{o:.3f}" for o in temp["order_v"]))
    lines.append("  observed temporal order b (floor-cancelled): "
                 + ", ".join(f"{o:.3f}" for o in temp["order_b"]))
    report = "\n".join(lines) + "\n"
    print(report, end="")
    with open(os.path.join(cfg.out_dir, "mms_report.txt"), "w",
              encoding="utf-8") as fh:
        fh.write(report)
    return EXIT_OK


def sweep_eps(cfg: cfgmod.SimConfig) -> int:
    """Identical runs along the eps ladder, distances to the eps=0 run."""
    eps_list = sorted(set(cfg.eps_values), reverse=True)
    if 0.0 not in eps_list:
        raise ValidationError("eps_values",
                              "must contain 0 (the reference run)")
    output.ensure_out_dir(cfg.out_dir)
    g = cfg.grid()
    finals = {}
    rho_min = {}
    b0_dist = {}
    for eps in eps_list:
        params = dataclasses.replace(cfg.params, eps=eps)
        sub = dataclasses.replace(cfg, params=params,
                                  out_dir=os.path.join(
                                      cfg.out_dir, f"eps_{eps:g}"))
        data = cfg.build_scenario(g)
        b0_reg = (st.regularize_initial_B(data.b0, eps) if eps > 0.0
                  else data.b0)
        rho_min[eps] = (float(con.cutoff_rho(b0_reg, eps).min())
                        if eps > 0.0 else 1.0)
        b0_dist[eps] = mms.l2_error_tensor(b0_reg, data.b0, g)
        code, s = _simulate(sub, sub.out_dir)
        if code != EXIT_OK:
            return code
        finals[eps] = s
    ref = finals[0.0]
    lines = ["eps,dist_v,dist_b,b0_dist,rho_min_t0"]
    dists = []
    for eps in eps_list:
        s = finals[eps]
        dv = mms.l2_error_velocity(s.vel, ref.vel, g)
        db = mms.l2_error_tensor(s.b6, ref.b6, g)
        if eps > 0.0:
            dists.append(dv + db)
        lines.append(f"{eps:g},{dv:.9e},{db:.9e},"
                     f"{b0_dist[eps]:.9e},{rho_min[eps]:.9e}")
    monotone = all(dists[i] >= dists[i + 1] for i in range(len(dists) - 1))
    lines.append(f"# monotone decreasing toward eps=0: {monotone}")
    table = "\n".join(lines) + "\n"
    print(table, end="")
    with open(os.path.join(cfg.out_dir, "sweep_eps.csv"), "w",
              encoding="utf-8") as fh:
        fh.write(table)
    return EXIT_OK if monotone else EXIT_NUMERICAL


def sweep_gamma(cfg: cfgmod.SimConfig) -> int:
    """Same scenario across the free-energy interpolation weights."""
    output.ensure_out_dir(cfg.out_dir)
    g = cfg.grid()
    rows = ["gamma,kinetic,free_energy,lam_min,dist_v_to_first,"
            "dist_b_to_first"]
    first = None
    for gam in cfg.gamma_values:
        params = dataclasses.replace(cfg.params, gamma=gam)
        sub = dataclasses.replace(cfg, params=params,
                                  out_dir=os.path.join(
                                      cfg.out_dir, f"gamma_{gam:g}"))
        code, s = _simulate(sub, sub.out_dir)
        if code != EXIT_OK:
            return code
        bud = en.compute_budget(s)
        lam = float(sa.lambda_min(s.b6).min())
        if first is None:
            first = s
            dv = db = 0.0
        else:
            dv = mms.l2_error_velocity(s.vel, first.vel, g)
            db = mms.l2_error_tensor(s.b6, first.b6, g)
        rows.append(f"{gam:g},{bud.kinetic:.9e},{bud.free_energy:.9e},"
                    f"{lam:.9e},{dv:.9e},{db:.9e}")
    table = "\n".join(rows) + "\n"
    print(table, end="")
    with open(os.path.join(cfg.out_dir, "sweep_gamma.csv"), "w",
              encoding="utf-8") as fh:
        fh.write(table)
    return EXIT_OK


def _near_degenerate_spd(n: int, rng: np.random.Generator) -> np.ndarray:
    """Spectra with two eigenvalues 1e-12 apart (eigensolver stress)."""
    lam = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), size=(n, 3)))
    lam[:, 1] = lam[:, 0] * (1.0 + 1e-12)
    q = rng.standard_normal((n, 3, 3))
    q, r = np.linalg.qr(q)
    sgn = np.sign(np.diagonal(r, axis1=1, axis2=2))
    sgn = np.where(sgn == 0.0, 1.0, sgn)
    q = q * sgn[:, None, :]
    m = np.matmul(q * lam[:, None, :], np.swapaxes(q, 1, 2))
    return sa.from_full(m)


_IDENTITY_KEYS = ("dist_log", "dist_quad", "coupling", "grad", "stress")


def check_identities(cfg: cfgmod.SimConfig) -> int:
    """Seeded random-matrix sweep of the energy-bookkeeping identities."""
    output.ensure_out_dir(cfg.out_dir)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.id_draws
    n_deg = max(64, n // 100)
    b = np.concatenate([sa.random_spd(n, rng),
                        _near_degenerate_spd(n_deg, rng)])
    res = con.dissipation_identities_check(
        b, cfg.params, rng,
        negate_gamma_term=(cfg.id_bug == "negate_gamma"))
    lines = [f"draws = {n} (+{n_deg} near-degenerate), seed = {cfg.seed}"]
    worst_key, worst_val, worst_idx = None, -1.0, -1
    for key in _IDENTITY_KEYS:
        mx = float(res[key].max())
        lines.append(f"max relative residual {key}: {mx:.3e}")
        if mx > worst_val:
            worst_key, worst_val = key, mx
            worst_idx = int(res[key].argmax())

    # midpoint convexity of both split energies, fixed sampling law
    rng_c = np.random.default_rng(cfg.seed + 1)
    m = 10000
    pa = sa.random_spd(m, rng_c, 0.05, 20.0)
    pb = sa.random_spd(m, rng_c, 0.05, 20.0)
    mid = 0.5 * (pa + pb)
    p1a, p2a = con.free_energy_parts(pa, cfg.params)
    p1b, p2b = con.free_energy_parts(pb, cfg.params)
    p1m, p2m = con.free_energy_parts(mid, cfg.params)
    slack1 = float((0.5 * (p1a + p1b) - p1m).min())
    slack2 = float((0.5 * (p2a + p2b) - p2m).min())
    lines.append(f"convexity slack psi1: {slack1:.3e}")
    lines.append(f"convexity slack psi2: {slack2:.3e}")

    report = "\n".join(lines) + "\n"
    print(report, end="")
    with open(os.path.join(cfg.out_dir, "identities_report.txt"), "w",
              encoding="utf-8") as fh:
        fh.write(report)

    if worst_val > 1e-10 or slack1 < -1e-12 or slack2 < -1e-12:
        mat = b[worst_idx]
        path = os.path.join(cfg.out_dir, "identity_violation.txt")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"identity = {worst_key}\n"
                     f"residual = {worst_val!r}\n"
                     f"packed = {mat.tolist()!r}\n"
                     f"full = {sa.to_full(mat).tolist()!r}\n"
                     f"eigenvalues = {sa.eigvals_sym3(mat).tolist()!r}\n")
        raise IdentityViolation(
            f"{worst_key} residual {worst_val:.3e} exceeds 1e-10 "
            f"(offending matrix in {path})")
    return EXIT_OK


_DISPATCH = {
    "run": run_scenario,
    "verify_mms": verify_mms,
    "sweep_eps": sweep_eps,
    "sweep_gamma": sweep_gamma,
    "check_identities": check_identities,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="viscoflow",
        description="Diffusive viscoelastic flow solver and verification "
                    "suite")
    parser.add_argument("mode", choices=cfgmod.MODES)
    parser.add_argument("--config", help="config file (omit for defaults)",
                        default=None)
    parser.add_argument("--out", help="output directory override")
    parser.add_argument("--seed", type=int, help="seed override")
    parser.add_argument("--threads", type=int,
                        help="kernel threads (parallel lane only)")
    args = parser.parse_args(argv)

    try:
        if args.config is not None:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as ex:
                print(f"cannot read config: {ex}", file=sys.stderr)
                return EXIT_CONFIG
        else:
            text = ""
        cfg = cfgmod.parse_config(text)
        over = {"mode": args.mode}
        if args.out is not None:
            over["out_dir"] = args.out
        if args.seed is not None:
            if args.seed < 0:
                raise ValidationError("seed", "must be >= 0")
            over["seed"] = args.seed
        cfg = dataclasses.replace(cfg, **over)
    except (ParseError, ValidationError) as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG

    if args.threads is not None:
        try:
            backend.set_threads(args.threads)
        except ValueError as ex:
            print(f"config error: threads: {ex}", file=sys.stderr)
            return EXIT_CONFIG

    try:
        return _DISPATCH[cfg.mode](cfg)
    except (ParseError, ValidationError) as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except IdentityViolation as ex:
        print(f"identity violation: {ex}", file=sys.stderr)
        return EXIT_IDENTITY
    except _NUMERICAL_ERRORS as ex:
        print(f"numerical failure: {type(ex).__name__}: {ex}",
              file=sys.stderr)
        return EXIT_NUMERICAL


def console() -> None:
    sys.exit(main())
