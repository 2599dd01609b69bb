from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import diag6, near_degenerate_spd
from viscoflow import constitutive as vc
from viscoflow import spd_algebra as sa
from viscoflow.errors import SingularMatrix, ValidationError

IDENT_KEYS = ("dist_log", "dist_quad", "coupling", "grad", "stress")


def params(**kw) -> vc.ModelParams:
    return vc.ModelParams(**kw)


# ---------------------------------------------------------------- ModelParams


def test_params_defaults_valid():
    p = params()
    assert p.gamma == 0.5
    assert not p.extrapolated_regime


@pytest.mark.parametrize("bad", [
    dict(nu=0.0), dict(nu=-1.0), dict(mu=0.0), dict(lambda_diff=0.0),
    dict(sigma=-1.0), dict(delta1=-0.5), dict(delta2=-0.5),
    dict(eps=-0.1), dict(eps=1.0), dict(gamma=0.0), dict(gamma=1.0),
    dict(gamma=-0.2), dict(nu=float("nan")), dict(mu=float("inf")),
])
def test_params_rejects_out_of_range(bad):
    with pytest.raises(ValidationError):
        params(**bad)


def test_params_gamma_zero_needs_diagnostics_flag():
    with pytest.raises(ValidationError):
        params(gamma=0.0)
    p = params(gamma=0.0, classical_ob=True)
    assert p.gamma == 0.0
    # the flag widens only the lower end
    with pytest.raises(ValidationError):
        params(gamma=1.0, classical_ob=True)


def test_params_extrapolated_regime():
    assert params(a=1.5).extrapolated_regime
    assert params(a=-2.0).extrapolated_regime
    assert not params(a=1.0).extrapolated_regime
    assert not params(a=-1.0).extrapolated_regime
    assert not params(a=0.0).extrapolated_regime


def test_giesekus_preset():
    p = vc.giesekus_preset(mu=2.0)
    assert p.delta1 == 0.0 and p.delta2 == 1.0 and p.mu == 2.0


# ---------------------------------------------------------------- free energy


def test_free_energy_identity_is_zero():
    for g in (0.1, 0.5, 0.9):
        assert vc.free_energy(sa.IDENT6, params(gamma=g, mu=3.0)) == 0.0


def test_free_energy_hand_values():
    b = diag6(2.0, 1.0, 1.0)
    want_log = 1.0 - math.log(2.0)
    p0 = params(mu=1.0, gamma=0.0, classical_ob=True)
    assert float(vc.free_energy(b, p0)) == pytest.approx(want_log, rel=1e-15)
    p5 = params(mu=1.0, gamma=0.5)
    assert float(vc.free_energy(b, p5)) == pytest.approx(
        0.5 * want_log + 0.25, rel=1e-15)


def test_free_energy_nonnegative_and_finite(spd_batch):
    psi = vc.free_energy(spd_batch, params(mu=2.0, gamma=0.3))
    assert np.all(np.isfinite(psi))
    assert np.all(psi >= 0.0)


def test_free_energy_blows_up_as_spd_boundary_nears():
    # divergence is logarithmic: the log branch contributes -(1-g) ln t
    vals = [float(vc.free_energy(diag6(t, 1.0, 1.0), params()))
            for t in (1e-2, 1e-5, 1e-8)]
    assert vals[0] < vals[1] < vals[2]
    assert vals[2] > 0.5 * (-math.log(1e-8)) * 0.9


def test_free_energy_rejects_non_spd():
    with pytest.raises(SingularMatrix):
        vc.free_energy(diag6(-1.0, 1.0, 1.0), params())
    with pytest.raises(SingularMatrix):
        vc.free_energy(diag6(0.0, 1.0, 1.0), params())


def test_free_energy_parts_recombine(moderate_spd_batch):
    p = params(mu=1.7, gamma=0.3)
    psi1, psi2 = vc.free_energy_parts(moderate_spd_batch, p)
    assert np.all(psi1 >= 0.0) and np.all(psi2 >= 0.0)
    total = p.gamma * psi1 + (1.0 - p.gamma) * psi2
    psi = vc.free_energy(moderate_spd_batch, p)
    assert np.allclose(total, psi, rtol=1e-13, atol=1e-13)


def test_free_energy_parts_zero_at_identity():
    psi1, psi2 = vc.free_energy_parts(sa.IDENT6, params())
    assert float(psi1) == 0.0 and float(psi2) == 0.0


# ---------------------------------------------------------------- derivative


def test_free_energy_deriv_identity_is_zero():
    assert np.array_equal(vc.free_energy_deriv(sa.IDENT6, params()),
                          np.zeros(6))


def test_free_energy_deriv_hand_value():
    # per eigenvalue 0.5 (1 - 1/4) + 0.5 (4 - 1) = 1.875, dyadic so bitwise
    j = vc.free_energy_deriv(diag6(4.0, 1.0, 1.0), params(mu=1.0, gamma=0.5))
    assert np.array_equal(j, diag6(1.875, 0.0, 0.0))


def test_free_energy_deriv_matches_finite_difference(moderate_spd_batch):
    """Central difference of the energy along random symmetric directions."""
    p = params(mu=1.3, gamma=0.4)
    b = moderate_spd_batch[:256]
    j = vc.free_energy_deriv(b, p)
    rng = np.random.default_rng(21)
    e = rng.standard_normal((256, 6))
    h = 1e-5
    fd = (vc.free_energy(b + h * e, p) - vc.free_energy(b - h * e, p)) / (2 * h)
    directional = sa.frob(j, e)
    assert np.all(np.abs(fd - directional) <= 1e-5 * (1.0 + np.abs(directional)))


def test_free_energy_deriv_second_order_in_h():
    p = params(mu=1.0, gamma=0.5)
    b = diag6(2.0, 0.5, 1.0)
    b[3:] = [0.2, -0.1, 0.3]
    e = np.array([0.4, -0.7, 0.3, 0.5, -0.2, 0.6])
    exact = float(sa.frob(vc.free_energy_deriv(b, p), e))
    errs = []
    for h in (1e-2, 1e-3):
        fd = float(vc.free_energy(b + h * e, p) - vc.free_energy(b - h * e, p))
        errs.append(abs(fd / (2 * h) - exact))
    # O(h^2): a decade in h buys ~100x, roundoff floor is far below err(1e-3)
    assert errs[0] / errs[1] > 50.0
    assert errs[0] / errs[1] < 200.0


def test_free_energy_deriv_commutes_with_b(moderate_spd_batch):
    p = params(mu=2.0, gamma=0.25)
    b = moderate_spd_batch[:2000]
    j = vc.free_energy_deriv(b, p)
    bf = sa.to_full(b)
    jf = sa.to_full(j)
    comm = np.matmul(bf, jf) - np.matmul(jf, bf)
    scale = (np.linalg.norm(bf, axis=(1, 2))
             * np.linalg.norm(jf, axis=(1, 2)) + 1.0)
    assert np.all(np.linalg.norm(comm, axis=(1, 2)) <= 1e-12 * scale)


def test_free_energy_deriv_rejects_non_spd():
    with pytest.raises(SingularMatrix):
        vc.free_energy_deriv(diag6(1.0, -2.0, 1.0), params())


# ------------------------------------------------------- stress / relaxation


def test_stress_identity_and_hand_value():
    p = params(gamma=0.5)
    assert np.array_equal(vc.stress_S(sa.IDENT6, p), np.zeros(6))
    assert np.array_equal(vc.stress_S(diag6(2.0, 1.0, 1.0), p),
                          diag6(1.5, 0.0, 0.0))


def test_stress_matches_b_times_deriv(moderate_spd_batch):
    # B J and mu S(B) are the same matrix; routes share nothing but B
    p = params(mu=1.9, gamma=0.35)
    b = moderate_spd_batch[:2000]
    j = vc.free_energy_deriv(b, p)
    bj = np.matmul(sa.to_full(b), sa.to_full(j))
    ms = p.mu * sa.to_full(vc.stress_S(b, p))
    scale = np.linalg.norm(bj, axis=(1, 2)) + np.linalg.norm(ms, axis=(1, 2)) + 1.0
    assert np.all(np.linalg.norm(bj - ms, axis=(1, 2)) <= 1e-12 * scale)


def test_relax_hand_values():
    b = diag6(2.0, 1.0, 1.0)
    assert np.array_equal(vc.relax_R(sa.IDENT6, params()), np.zeros(6))
    assert np.array_equal(vc.relax_R(b, params(delta1=1.0, delta2=0.0)),
                          diag6(1.0, 0.0, 0.0))
    assert np.array_equal(vc.relax_R(b, params(delta1=0.0, delta2=1.0)),
                          diag6(2.0, 0.0, 0.0))


def test_cauchy_stress_rest_state():
    t = vc.cauchy_stress(sa.IDENT6, np.zeros(6), 3.0, params())
    assert np.array_equal(t, diag6(-3.0, -3.0, -3.0))


def test_cauchy_stress_hand_value():
    p = params(mu=1.0, nu=1.0, a=1.0, gamma=0.5)
    t = vc.cauchy_stress(diag6(2.0, 1.0, 1.0), np.zeros(6), 0.0, p)
    assert np.array_equal(t, diag6(3.0, 0.0, 0.0))


def test_cauchy_stress_corrotational_drops_b(moderate_spd_batch):
    p = params(a=0.0, nu=1.4)
    b = moderate_spd_batch[:500]
    rng = np.random.default_rng(3)
    d = vc.random_tracefree_sym(500, rng)
    pr = rng.standard_normal(500)
    t = vc.cauchy_stress(b, d, pr, p)
    want = 2.0 * p.nu * d
    for i in range(3):
        want[:, i] -= pr
    assert np.array_equal(t, want)


# --------------------------------------------------------------- entropy


def test_entropy_production_rest_is_zero():
    gz = np.zeros((3, 6))
    assert float(vc.entropy_production(sa.IDENT6, gz, np.zeros(6),
                                       params())) == 0.0


def test_entropy_production_viscous_hand_value():
    # only 2 nu |D|^2 survives at B = I: 2 * 1 * (1 + 1) = 4
    gz = np.zeros((3, 6))
    xi = vc.entropy_production(sa.IDENT6, gz, diag6(1.0, -1.0, 0.0),
                               params(nu=1.0))
    assert float(xi) == 4.0


def test_entropy_production_nonnegative(spd_batch):
    b = spd_batch[:20000]
    rng = np.random.default_rng(17)
    gradb = rng.standard_normal((20000, 3, 6))
    d = vc.random_tracefree_sym(20000, rng)
    p = params(mu=0.8, nu=0.6, lambda_diff=1.3, delta1=0.7, delta2=0.4,
               gamma=0.35)
    xi = vc.entropy_production(b, gradb, d, p)
    assert np.all(np.isfinite(xi))
    assert np.all(xi >= 0.0)


def test_entropy_production_positive_off_equilibrium():
    gz = np.zeros((3, 6))
    p = params(delta1=1.0, delta2=0.0)
    assert float(vc.entropy_production(diag6(1.01, 1.0, 1.0), gz,
                                       np.zeros(6), p)) > 0.0


def test_entropy_production_rejects_non_spd():
    gz = np.zeros((3, 6))
    with pytest.raises(SingularMatrix):
        vc.entropy_production(diag6(-1.0, 1.0, 1.0), gz, np.zeros(6), params())


# ---------------------------------------------------------------- cutoff


def test_cutoff_hand_values():
    assert float(vc.cutoff_rho(sa.IDENT6, 0.0)) == 1.0
    assert float(vc.cutoff_rho(diag6(0.5, 1.0, 1.0), 0.5)) == 0.0
    want = 0.5 / (1.0 + 0.5 * 3.0 ** 1.5)
    assert float(vc.cutoff_rho(sa.IDENT6, 0.5)) == pytest.approx(want, rel=1e-14)


def test_cutoff_zero_eigenvalue_defined_as_zero():
    assert float(vc.cutoff_rho(diag6(0.0, 1.0, 1.0), 0.0)) == 0.0


def test_cutoff_range_and_vanishing_set():
    rng = np.random.default_rng(13)
    a6 = rng.standard_normal((5000, 6)) * 2.0
    eps = 0.3
    rho = vc.cutoff_rho(a6, eps)
    assert np.all(rho >= 0.0) and np.all(rho <= 1.0)
    lam = sa.lambda_min(a6)
    assert np.array_equal(rho == 0.0, lam <= eps)


def test_cutoff_monotone_in_eps(moderate_spd_batch):
    b = moderate_spd_batch[:3000]
    prev = vc.cutoff_rho(b, 0.01)
    for eps in (0.05, 0.1, 0.5):
        cur = vc.cutoff_rho(b, eps)
        assert np.all(cur <= prev)
        prev = cur


def test_cutoff_tends_to_one_as_eps_vanishes():
    # gap scales like eps (1/L + |A|^3), here ~ 51 eps
    b = diag6(0.7, 2.0, 3.0)
    gaps = [abs(1.0 - float(vc.cutoff_rho(b, e)))
            for e in (1e-1, 1e-3, 1e-6)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-4


def test_cutoff_rejects_negative_eps():
    with pytest.raises(ValidationError):
        vc.cutoff_rho(sa.IDENT6, -0.1)


def test_cutoff_continuous_across_threshold():
    eps = 0.5
    below = float(vc.cutoff_rho(diag6(eps - 1e-9, 1.0, 1.0), eps))
    above = float(vc.cutoff_rho(diag6(eps + 1e-9, 1.0, 1.0), eps))
    assert below == 0.0
    assert above < 1e-8


# ----------------------------------------------------- identity residuals


def test_identity_check_hand_value_diag411():
    # both routes of the first pairing evaluate to 45/8 on this input
    p = params(mu=1.0, gamma=0.5)
    b = diag6(4.0, 1.0, 1.0)
    j = vc.free_energy_deriv(b, p)
    lhs = float(sa.frob(b - sa.IDENT6, j))
    assert lhs == 5.625
    half = sa.pow_sym(b, 0.5) - sa.pow_sym(b, -0.5)
    rhs = 0.5 * float(sa.frob(half, half)) \
        + 0.5 * float(sa.frob(b - sa.IDENT6, b - sa.IDENT6))
    assert rhs == 5.625
    res = vc.dissipation_identities_check(b, p)
    assert float(res["dist_log"]) <= 1e-14


def test_identity_check_exact_zero_at_identity():
    b = np.tile(sa.IDENT6, (8, 1))
    res = vc.dissipation_identities_check(b, params(mu=2.0, gamma=0.3, a=0.7))
    for k, v in res.items():
        assert np.all(v == 0.0), k


def test_identity_check_sweep(spd_batch):
    res = vc.dissipation_identities_check(
        spd_batch[:10000], params(mu=1.0, gamma=0.5),
        rng=np.random.default_rng(7))
    for k in IDENT_KEYS:
        assert res[k].max() <= 1e-10, (k, res[k].max())


def test_identity_check_near_degenerate_pairs():
    b = near_degenerate_spd(5000, 1e-12)
    res = vc.dissipation_identities_check(
        b, params(mu=1.0, gamma=0.5), rng=np.random.default_rng(11))
    for k in IDENT_KEYS:
        assert res[k].max() <= 1e-10, (k, res[k].max())


@pytest.mark.parametrize("gamma,a", [(0.1, 1.0), (0.9, -0.5), (0.5, 0.0)])
def test_identity_check_parameter_sweep(moderate_spd_batch, gamma, a):
    res = vc.dissipation_identities_check(
        moderate_spd_batch[:3000], params(mu=1.8, gamma=gamma, a=a),
        rng=np.random.default_rng(2))
    for k in IDENT_KEYS:
        assert res[k].max() <= 1e-10, (k, res[k].max())


def test_identity_check_mutation_hook_flags_every_draw(spd_batch):
    """Sanity of the checker itself: a sign flip planted in the spectral
    route must push every draw of every family far above the gate."""
    res = vc.dissipation_identities_check(
        spd_batch[:10000], params(mu=1.0, gamma=0.5),
        rng=np.random.default_rng(7), negate_gamma_term=True)
    for k in IDENT_KEYS:
        assert res[k].min() > 1e-7, k


def test_identity_check_reports_absolute_gaps(moderate_spd_batch):
    b = moderate_spd_batch[:100]
    res = vc.dissipation_identities_check(b, params(),
                                          rng=np.random.default_rng(1))
    for k in IDENT_KEYS:
        assert k + "_abs" in res
        assert np.all(np.isfinite(res[k + "_abs"]))
        assert np.all(res[k + "_abs"] >= 0.0)
        # relative form never exceeds the absolute gap
        assert np.all(res[k] <= res[k + "_abs"] + 1e-300)


def test_identity_check_preserves_leading_shape(moderate_spd_batch):
    b = moderate_spd_batch[:6].reshape(2, 3, 6)
    res = vc.dissipation_identities_check(b, params())
    assert res["dist_log"].shape == (2, 3)


def test_identity_check_rejects_non_spd():
    with pytest.raises(SingularMatrix):
        vc.dissipation_identities_check(diag6(1.0, 0.0, 1.0), params())


# ------------------------------------------------------------- properties


def test_free_energy_midpoint_convexity():
    # eigenvalue spread capped so the 1e-12 slack is meaningful against
    # psi values of order one, not drowned by 1e6-conditioned roundoff
    rng = np.random.default_rng(31)
    a = sa.random_spd(2000, rng, lam_lo=0.05, lam_hi=20.0)
    b = sa.random_spd(2000, rng, lam_lo=0.05, lam_hi=20.0)
    for g in (0.1, 0.5, 0.9):
        p = params(mu=1.0, gamma=g)
        mid = vc.free_energy(0.5 * (a + b), p)
        avg = 0.5 * (vc.free_energy(a, p) + vc.free_energy(b, p))
        assert np.all(mid <= avg + 1e-12)


def test_free_energy_parts_midpoint_convexity():
    rng = np.random.default_rng(33)
    a = sa.random_spd(2000, rng, lam_lo=0.05, lam_hi=20.0)
    b = sa.random_spd(2000, rng, lam_lo=0.05, lam_hi=20.0)
    p = params(mu=1.0, gamma=0.5)
    m1, m2 = vc.free_energy_parts(0.5 * (a + b), p)
    a1, a2 = vc.free_energy_parts(a, p)
    b1, b2 = vc.free_energy_parts(b, p)
    assert np.all(m1 <= 0.5 * (a1 + b1) + 1e-12)
    assert np.all(m2 <= 0.5 * (a2 + b2) + 1e-12)


def test_hencky_expansion_third_order():
    """psi(exp(hH))/mu = tr((hH)^2)/2 + O(h^3), uniformly in gamma."""
    rng = np.random.default_rng(5)
    h6 = vc.random_tracefree_sym(1, rng)[0]
    h6 /= math.sqrt(float(sa.frob(h6, h6)))
    hf = sa.to_full(h6)
    assert abs(np.trace(hf @ hf @ hf)) > 0.1  # cubic term must not hide
    steps = (1e-1, 1e-2, 1e-3)
    c_of_gamma = []
    for g in (0.1, 0.5, 0.9):
        p = params(mu=1.0, gamma=g)
        resid = []
        for h in steps:
            psi = float(vc.free_energy(sa.exp_sym(h * h6), p))
            resid.append(abs(psi - 0.5 * h * h * float(sa.frob(h6, h6))))
        assert resid[0] / resid[1] >= 500.0
        assert resid[1] / resid[2] >= 500.0
        c_of_gamma.append(max(r / h ** 3 for r, h in zip(resid, steps)))
    # one constant serves every gamma: the spread stays a small factor
    assert max(c_of_gamma) <= 3.5 * min(c_of_gamma)
    assert max(c_of_gamma) < 1.0


def test_damped_source_growth_is_bounded():
    """rho_eps caps the polynomial sources: the product stops growing once
    |A| passes the 1/eps^(1/3) knee instead of scaling like |A|^3."""
    p = params(mu=1.0, gamma=0.5, delta1=1.0, delta2=1.0)
    eps = 0.1
    rng = np.random.default_rng(9)
    base = sa.random_spd(4000, rng, lam_lo=1e-2, lam_hi=1.0)
    maxima = []
    for scale in (1.0, 1e2, 1e4, 5e5):
        a6 = base * scale
        an = sa.frob_norm(a6)
        prod = vc.cutoff_rho(a6, eps) * (
            sa.frob_norm(vc.stress_S(a6, p))
            + sa.frob_norm(vc.relax_R(a6, p)) * an
            + an ** 2
        )
        maxima.append(float(prod.max()))
    assert max(maxima) <= 20.0
    # plateau: another 3 decades of |A| moves the max by < 50%
    assert maxima[-1] <= 1.5 * maxima[-2]


def test_random_tracefree_sym_is_tracefree():
    d = vc.random_tracefree_sym(1000, np.random.default_rng(0))
    assert np.all(np.abs(d[:, 0] + d[:, 1] + d[:, 2]) <= 1e-15)
