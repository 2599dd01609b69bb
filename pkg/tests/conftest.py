from __future__ import annotations

import numpy as np
import pytest

from viscoflow import spd_algebra as sa


def diag6(x, y, z) -> np.ndarray:
    return np.array([x, y, z, 0.0, 0.0, 0.0], dtype=np.float64)


def near_degenerate_spd(n: int, rel_split: float, seed: int = 3,
                        lam_lo: float = 1e-3, lam_hi: float = 1e3) -> np.ndarray:
    """SPD batch where one random eigenvalue pair sits rel_split apart."""
    rng = np.random.default_rng(seed)
    lam = np.exp(rng.uniform(np.log(lam_lo), np.log(lam_hi), size=(n, 3)))
    which = rng.integers(0, 3, size=n)
    other = (which + 1) % 3
    rows = np.arange(n)
    lam[rows, other] = lam[rows, which] * (1.0 + rel_split)
    g = rng.standard_normal((n, 3, 3))
    q, r = np.linalg.qr(g)
    s = np.sign(np.diagonal(r, axis1=1, axis2=2))
    s[s == 0] = 1.0
    q = q * s[:, None, :]
    m = np.matmul(q * lam[:, None, :], np.swapaxes(q, 1, 2))
    return sa.from_full(m)


def lane_probe_outputs() -> dict[str, np.ndarray]:
    """One battery of kernel calls on fixed-seed inputs.

    Shared by the cross-lane agreement test and its subprocess helper so
    both lanes evaluate byte-identical inputs.
    """
    rng = np.random.default_rng(77)
    b = sa.random_spd(4000, rng)
    bmod = sa.random_spd(4000, rng, lam_lo=0.1, lam_hi=10.0)
    sym = rng.standard_normal((4000, 6))
    gv = rng.standard_normal((4000, 3, 3))
    g6 = rng.standard_normal((4000, 3, 6))
    vals, vecs = sa.eig_sym3(b)
    recon = np.matmul(vecs * vals[..., None, :], np.swapaxes(vecs, -1, -2))
    out = {
        "vals": vals,
        "recon": recon,
        "inv": sa.inv(bmod),
        "sqrtm": sa.pow_sym(bmod, 0.5),
        "isqrtm": sa.pow_sym(bmod, -0.5),
        "logm": sa.hencky_log(bmod),
        "expm": sa.exp_sym(0.3 * sym),
        "cut": sa.cutoff_field(sym, 0.2),
        "poly": sa.poly_combo(b, 0.4, 0.6),
        "obj": sa.objective_source(b, gv, 0.7),
        "psi": sa.free_energy_field(b, 1.3, 0.4)[0],
    }
    for k, v in sa.budget_pointwise(b, g6, 1.3, 0.4).items():
        out["bud_" + k] = v
    return out


@pytest.fixture(scope="session")
def spd_batch() -> np.ndarray:
    # the sampling law of the identity sweeps: six-decade spectra
    return sa.random_spd(20_000, np.random.default_rng(42))


@pytest.fixture(scope="session")
def moderate_spd_batch() -> np.ndarray:
    # condition <= ~1e2: where absolute 1e-12 tolerances are meaningful
    return sa.random_spd(5_000, np.random.default_rng(7), lam_lo=0.1, lam_hi=10.0)
