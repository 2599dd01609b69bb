"""Pointwise symmetric 3x3 matrix algebra on packed arrays.

A symmetric matrix is stored as six floats in the order
(a11, a22, a33, a12, a13, a23).  Every function here accepts arrays of
shape (..., 6) and maps over the leading dimensions, so a single matrix
is just the (6,) case.  Matrix functions (powers, logs, exponentials)
are spectral, never series-based, and products that are symmetric in
exact arithmetic are re-symmetrized via (M + M^T)/2 on repacking.

Two execution lanes provide the heavy kernels: compiled per-cell loops
(`_pointwise_numba`) and vectorized NumPy (`_pointwise_numpy`).  The
lane is chosen once at import by `backend`; light arithmetic (traces,
Frobenius products, adjugate inverses) stays in NumPy on both lanes
since it is memory-bound either way.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _pointwise_numpy as _npk
from . import backend
from .errors import SingularMatrix

if backend.NUMBA_ENABLED:
    from . import _pointwise_numba as _nbk
else:  # pragma: no cover - exercised via VISCOFLOW_NUMBA=0 in test_lanes
    _nbk = None

IDENT6 = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])

MATFUNC_POW = _npk.MATFUNC_POW
MATFUNC_LOG = _npk.MATFUNC_LOG
MATFUNC_EXP = _npk.MATFUNC_EXP


class Spectrum3(NamedTuple):
    """Eigen-decomposition of a symmetric 3x3 matrix (field).

    vals: (..., 3) eigenvalues, ascending.
    vecs: (..., 3, 3) orthonormal eigenvectors as columns, matching vals.
    """

    vals: np.ndarray
    vecs: np.ndarray


def _flat(a6) -> tuple[np.ndarray, tuple]:
    a = np.ascontiguousarray(a6, dtype=np.float64)
    if a.shape[-1] != 6:
        raise ValueError(f"packed symmetric arrays need last axis 6, got {a.shape}")
    return a.reshape(-1, 6), a.shape[:-1]


def from_full(m) -> np.ndarray:
    """Pack (..., 3, 3) matrices, symmetrizing as (M + M^T)/2."""
    arr = np.ascontiguousarray(m, dtype=np.float64)
    lead = arr.shape[:-2]
    out = _npk.full_to_sym(arr.reshape(-1, 3, 3))
    return out.reshape(lead + (6,))


def to_full(a6) -> np.ndarray:
    flat, lead = _flat(a6)
    return _npk.sym_to_full(flat).reshape(lead + (3, 3))


def trace(a6) -> np.ndarray:
    flat, lead = _flat(a6)
    return _npk.trace(flat).reshape(lead)


def det(a6) -> np.ndarray:
    flat, lead = _flat(a6)
    return _npk.det(flat).reshape(lead)


def frob(a6, b6) -> np.ndarray:
    """Frobenius inner product A:B = sum_ij A_ij B_ij."""
    fa, lead = _flat(a6)
    fb, leadb = _flat(b6)
    if lead != leadb:
        raise ValueError(f"shape mismatch {lead} vs {leadb}")
    return _npk.frob(fa, fb).reshape(lead)


def frob_norm(a6) -> np.ndarray:
    flat, lead = _flat(a6)
    return np.sqrt(np.maximum(_npk.frob(flat, flat), 0.0)).reshape(lead)


def square(a6) -> np.ndarray:
    flat, lead = _flat(a6)
    return _npk.square(flat).reshape(lead + (6,))


def eigvals_sym3(a6) -> np.ndarray:
    """Eigenvalues only, ascending; bitwise-exact for diagonal input."""
    flat, lead = _flat(a6)
    if _nbk is not None:
        out = np.empty((flat.shape[0], 3))
        _nbk.eigvals_field(flat, out)
    else:
        out = _npk.eigvals(flat)
    return out.reshape(lead + (3,))


def eig_sym3(a6) -> Spectrum3:
    """Full spectral decomposition with orthonormal eigenvectors.

    Closed-form trigonometric eigenvalues with cross-product eigenvectors;
    near-degenerate spectra (gap product below 1e-14 ||A||^3) fall back to
    an iterative dense solve.  Reconstruction holds to 1e-12 (1 + ||A||_F).
    """
    flat, lead = _flat(a6)
    if _nbk is not None:
        vals = np.empty((flat.shape[0], 3))
        vecs = np.empty((flat.shape[0], 3, 3))
        _nbk.eig_field(flat, vals, vecs)
    else:
        vals, vecs = _npk.eig(flat)
    return Spectrum3(vals.reshape(lead + (3,)), vecs.reshape(lead + (3, 3)))


def lambda_min(a6) -> np.ndarray:
    """Smallest eigenvalue; the positivity margin of a conformation value."""
    return eigvals_sym3(a6)[..., 0]


def inv(a6) -> np.ndarray:
    """Inverse of an SPD matrix via the adjugate.

    Raises SingularMatrix when any input has lambda_min <= 0: a
    nonpositive spectrum here always means positivity was lost upstream.
    """
    flat, lead = _flat(a6)
    lam = eigvals_sym3(flat)[:, 0]
    bad = lam <= 0.0
    if np.any(bad):
        i = int(np.argmin(lam))
        raise SingularMatrix(
            f"inverse needs a positive definite matrix; "
            f"min eigenvalue {lam[i]:.3e} at flat index {i}"
        )
    out, _ = _npk.inv_spd(flat)
    return out.reshape(lead + (6,))


def _matfunc(a6, mode: int, p: float, op_name: str, need_spd: bool) -> np.ndarray:
    flat, lead = _flat(a6)
    if _nbk is not None:
        out = np.empty_like(flat)
        lam = np.empty(flat.shape[0])
        _nbk.matfunc_field(flat, mode, p, out, lam)
        lam_min_val = float(lam.min()) if lam.size else np.inf
    else:
        out, lam_min_val = _npk.matfunc(flat, mode, p)
    if need_spd and lam_min_val <= 0.0:
        raise SingularMatrix(
            f"{op_name} needs a positive definite matrix; "
            f"min eigenvalue {lam_min_val:.3e}"
        )
    return out.reshape(lead + (6,))


def pow_sym(a6, p: float) -> np.ndarray:
    """Spectral power A^p.  Integer p >= 0 works for any symmetric input;
    anything else requires SPD (raises SingularMatrix otherwise)."""
    p = float(p)
    need_spd = not (p.is_integer() and p >= 0.0)
    return _matfunc(a6, MATFUNC_POW, p, f"pow_sym(p={p})", need_spd)


def hencky_log(a6) -> np.ndarray:
    """Matrix logarithm of an SPD matrix: exp(hencky_log(A)) == A."""
    return _matfunc(a6, MATFUNC_LOG, 0.0, "hencky_log", True)


def exp_sym(a6) -> np.ndarray:
    """Matrix exponential of a symmetric matrix (always defined)."""
    return _matfunc(a6, MATFUNC_EXP, 0.0, "exp_sym", False)


def poly_combo(a6, c1: float, c2: float) -> np.ndarray:
    """c1 (A - I) + c2 (A^2 - A); the shared form of the elastic stress
    and relaxation polynomials."""
    flat, lead = _flat(a6)
    if _nbk is not None:
        out = np.empty_like(flat)
        _nbk.poly_field(flat, c1, c2, out)
    else:
        out = _npk.poly_combo(flat, c1, c2)
    return out.reshape(lead + (6,))


def objective_source(b6, grad_v, a_param: float) -> np.ndarray:
    """a (D B + B D) + (W B - B W) assembled as P + P^T with
    P = ((a+1)/2 G + (a-1)/2 G^T) B, G the full velocity gradient.

    grad_v: (..., 3, 3) with G[i, j] = d v_i / d x_j.
    """
    flat_b, lead = _flat(b6)
    g = np.ascontiguousarray(grad_v, dtype=np.float64).reshape(-1, 3, 3)
    if g.shape[0] != flat_b.shape[0]:
        raise ValueError("conformation and gradient fields disagree in size")
    if _nbk is not None:
        out = np.empty_like(flat_b)
        _nbk.objective_source_field(flat_b, g, a_param, out)
    else:
        out = _npk.objective_source(flat_b, g, a_param)
    return out.reshape(lead + (6,))


def cutoff_field(a6, eps: float) -> np.ndarray:
    """Source damping factor in [0, 1]; exactly 0 iff lambda_min <= eps."""
    flat, lead = _flat(a6)
    if _nbk is not None:
        out = np.empty(flat.shape[0])
        _nbk.cutoff_field(flat, eps, out)
    else:
        out = _npk.cutoff(flat, eps)
    return out.reshape(lead)


def free_energy_field(b6, mu: float, gamma: float) -> tuple[np.ndarray, float]:
    """Stored elastic energy density per matrix; returns (psi, min eigenvalue
    over the whole field).  Domain policing is the caller's job."""
    flat, lead = _flat(b6)
    if _nbk is not None:
        psi = np.empty(flat.shape[0])
        lam = np.empty(flat.shape[0])
        _nbk.free_energy_field(flat, mu, gamma, psi, lam)
        lam_min_val = float(lam.min()) if lam.size else np.inf
    else:
        psi, lam = _npk.free_energy(flat, mu, gamma)
        lam_min_val = float(lam.min()) if lam.size else np.inf
    return psi.reshape(lead), lam_min_val


def budget_pointwise(b6, grads, mu: float, gamma: float) -> dict[str, np.ndarray]:
    """Fused per-cell integrands of the energy budget.

    grads: (..., 3, 6), the three spatial partials of the conformation
    field.  Returns per-cell arrays keyed: grad_quad, grad_log, relax_log,
    relax_quad, dist_quad, psi, lam_min (see `_pointwise_numpy` for the
    formulas).
    """
    flat_b, lead = _flat(b6)
    g = np.ascontiguousarray(grads, dtype=np.float64).reshape(-1, 3, 6)
    if g.shape[0] != flat_b.shape[0]:
        raise ValueError("conformation and gradient fields disagree in size")
    if _nbk is not None:
        n = flat_b.shape[0]
        outs = {k: np.empty(n) for k in (
            "grad_quad", "grad_log", "relax_log", "relax_quad",
            "dist_quad", "psi", "lam_min",
        )}
        _nbk.budget_field(
            flat_b, g, mu, gamma,
            outs["grad_quad"], outs["grad_log"], outs["relax_log"],
            outs["relax_quad"], outs["dist_quad"], outs["psi"],
            outs["lam_min"],
        )
    else:
        outs = _npk.budget_pointwise(flat_b, g, mu, gamma)
    return {k: v.reshape(lead) for k, v in outs.items()}


def random_spd(n: int, rng: np.random.Generator,
               lam_lo: float = 1e-3, lam_hi: float = 1e3) -> np.ndarray:
    """Reproducible SPD sample: eigenvalues log-uniform in [lam_lo, lam_hi],
    eigenframes from QR of standard normal matrices (sign-fixed)."""
    lam = np.exp(rng.uniform(np.log(lam_lo), np.log(lam_hi), size=(n, 3)))
    g = rng.standard_normal((n, 3, 3))
    q, r = np.linalg.qr(g)
    s = np.sign(np.diagonal(r, axis1=1, axis2=2))
    s = np.where(s == 0.0, 1.0, s)
    q = q * s[:, None, :]
    m = np.matmul(q * lam[:, None, :], np.swapaxes(q, 1, 2))
    return _npk.full_to_sym(m)
