"""Vectorized pure-NumPy kernels for pointwise symmetric-3x3 field algebra.

All routines operate on arrays of shape (n, 6) holding the packed components
of symmetric matrices in the order (xx, yy, zz, xy, xz, yz):

    A = [[a0, a3, a4],
         [a3, a1, a5],
         [a4, a5, a2]]

This is the fallback lane; `_pointwise_numba` implements the same contracts
cell-by-cell under @njit.  Keep the two in sync — `tests/test_lanes.py`
cross-checks them.
"""

from __future__ import annotations

import numpy as np

# Trigger for the robust eigensolver branch: the product of eigenvalue gaps
# (the scaled discriminant of the characteristic cubic) under this fraction
# of ||A||^3 means the cross-product eigenvector construction may be too
# ill-conditioned, so the subset is re-solved by a dense symmetric solver.
DEGENERATE_DISC_FRACTION = 1e-14

_IDX_DIAG = (0, 1, 2)
_IDX_OFF = (3, 4, 5)


def sym_to_full(a6: np.ndarray) -> np.ndarray:
    """(n,6) packed -> (n,3,3) full symmetric matrices."""
    n = a6.shape[0]
    m = np.empty((n, 3, 3), dtype=a6.dtype)
    m[:, 0, 0] = a6[:, 0]
    m[:, 1, 1] = a6[:, 1]
    m[:, 2, 2] = a6[:, 2]
    m[:, 0, 1] = m[:, 1, 0] = a6[:, 3]
    m[:, 0, 2] = m[:, 2, 0] = a6[:, 4]
    m[:, 1, 2] = m[:, 2, 1] = a6[:, 5]
    return m


def full_to_sym(m: np.ndarray) -> np.ndarray:
    """(n,3,3) -> (n,6), symmetrizing as (M + M^T)/2."""
    a6 = np.empty((m.shape[0], 6), dtype=m.dtype)
    a6[:, 0] = m[:, 0, 0]
    a6[:, 1] = m[:, 1, 1]
    a6[:, 2] = m[:, 2, 2]
    a6[:, 3] = 0.5 * (m[:, 0, 1] + m[:, 1, 0])
    a6[:, 4] = 0.5 * (m[:, 0, 2] + m[:, 2, 0])
    a6[:, 5] = 0.5 * (m[:, 1, 2] + m[:, 2, 1])
    return a6


def trace(a6: np.ndarray) -> np.ndarray:
    return a6[:, 0] + a6[:, 1] + a6[:, 2]


def frob(a6: np.ndarray, b6: np.ndarray) -> np.ndarray:
    """Frobenius inner product A:B for packed symmetric matrices."""
    return (
        a6[:, 0] * b6[:, 0]
        + a6[:, 1] * b6[:, 1]
        + a6[:, 2] * b6[:, 2]
        + 2.0 * (a6[:, 3] * b6[:, 3] + a6[:, 4] * b6[:, 4] + a6[:, 5] * b6[:, 5])
    )


def det(a6: np.ndarray) -> np.ndarray:
    a0, a1, a2, a3, a4, a5 = (a6[:, i] for i in range(6))
    return (
        a0 * (a1 * a2 - a5 * a5)
        - a3 * (a3 * a2 - a5 * a4)
        + a4 * (a3 * a5 - a1 * a4)
    )


def square(a6: np.ndarray) -> np.ndarray:
    """A @ A for packed symmetric A (result is symmetric, exact algebra)."""
    a0, a1, a2, a3, a4, a5 = (a6[:, i] for i in range(6))
    out = np.empty_like(a6)
    out[:, 0] = a0 * a0 + a3 * a3 + a4 * a4
    out[:, 1] = a3 * a3 + a1 * a1 + a5 * a5
    out[:, 2] = a4 * a4 + a5 * a5 + a2 * a2
    out[:, 3] = a0 * a3 + a3 * a1 + a4 * a5
    out[:, 4] = a0 * a4 + a3 * a5 + a4 * a2
    out[:, 5] = a3 * a4 + a1 * a5 + a5 * a2
    return out


def chol_lower_inv(a6: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse Cholesky factor N = L^-1 (B = L L^T), plus det B.

    Returns (n6, det): n6 packs the lower triangle (n00, n11, n22, n10,
    n20, n21).  Purely algebraic route, independent of any
    eigendecomposition; used as the second leg of dual-route identity
    checks.  Unlike an adjugate/determinant inverse it has no
    large-product cancellation, so it stays accurate at condition numbers
    ~1e6 where the adjugate's determinant loses half its digits.  Non-SPD
    input yields NaNs (negative pivot under sqrt); domain checks are the
    caller's job.
    """
    a0, a1, a2, a3, a4, a5 = (a6[:, i] for i in range(6))
    with np.errstate(divide="ignore", invalid="ignore"):
        l00 = np.sqrt(a0)
        l10 = a3 / l00
        l20 = a4 / l00
        l11 = np.sqrt(a1 - l10 * l10)
        l21 = (a5 - l20 * l10) / l11
        l22 = np.sqrt(a2 - l20 * l20 - l21 * l21)
        n6 = np.empty_like(a6)
        n6[:, 0] = 1.0 / l00
        n6[:, 1] = 1.0 / l11
        n6[:, 2] = 1.0 / l22
        n6[:, 3] = -l10 * n6[:, 0] * n6[:, 1]
        n6[:, 5] = -l21 * n6[:, 1] * n6[:, 2]
        n6[:, 4] = (l10 * l21 - l20 * l11) * n6[:, 0] * n6[:, 1] * n6[:, 2]
    d = l00 * l11 * l22
    return n6, d * d


def lower_tri_full(n6: np.ndarray) -> np.ndarray:
    """(n,6) packed lower triangle (00,11,22,10,20,21) -> (n,3,3)."""
    m = np.zeros((n6.shape[0], 3, 3), dtype=n6.dtype)
    m[:, 0, 0] = n6[:, 0]
    m[:, 1, 1] = n6[:, 1]
    m[:, 2, 2] = n6[:, 2]
    m[:, 1, 0] = n6[:, 3]
    m[:, 2, 0] = n6[:, 4]
    m[:, 2, 1] = n6[:, 5]
    return m


def inv_spd(a6: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """SPD inverse B^-1 = N^T N with N the inverse Cholesky factor.

    Returns (inv6, det).  See chol_lower_inv for accuracy notes.
    """
    n6, d = chol_lower_inv(a6)
    n00, n11, n22, n10, n20, n21 = (n6[:, i] for i in range(6))
    inv = np.empty_like(a6)
    inv[:, 0] = n00 * n00 + n10 * n10 + n20 * n20
    inv[:, 1] = n11 * n11 + n21 * n21
    inv[:, 2] = n22 * n22
    inv[:, 3] = n10 * n11 + n20 * n21
    inv[:, 4] = n20 * n22
    inv[:, 5] = n21 * n22
    return inv, d


def eigvals(a6: np.ndarray) -> np.ndarray:
    """Eigenvalues, ascending, shape (n, 3).

    Closed-form trigonometric solution of the characteristic cubic; exact
    (bitwise) for diagonal input.
    """
    a0, a1, a2, a3, a4, a5 = (a6[:, i] for i in range(6))
    p1 = a3 * a3 + a4 * a4 + a5 * a5
    q = (a0 + a1 + a2) / 3.0
    d0, d1, d2 = a0 - q, a1 - q, a2 - q
    p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    safe_p = np.where(p > 0.0, p, 1.0)

    # det((A - q I) / p) / 2
    b0, b1, b2 = d0 / safe_p, d1 / safe_p, d2 / safe_p
    b3, b4, b5 = a3 / safe_p, a4 / safe_p, a5 / safe_p
    r = 0.5 * (
        b0 * (b1 * b2 - b5 * b5)
        - b3 * (b3 * b2 - b5 * b4)
        + b4 * (b3 * b5 - b1 * b4)
    )
    r = np.clip(r, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    mid = 3.0 * q - hi - lo
    vals = np.stack([lo, mid, hi], axis=1)

    diag_exact = p1 == 0.0
    if np.any(diag_exact):
        vals[diag_exact] = np.sort(a6[diag_exact][:, :3], axis=1)
    return vals


def _null_vec(m: np.ndarray, lam: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit null vector of (M - lam I) via the largest column cross product.

    Returns (vec, cross_norm); callers treat tiny norms as degenerate.
    """
    s = m.copy()
    idx = np.arange(3)
    s[:, idx, idx] -= lam[:, None]
    c0, c1, c2 = s[:, :, 0], s[:, :, 1], s[:, :, 2]
    cands = np.stack(
        [np.cross(c0, c1), np.cross(c0, c2), np.cross(c1, c2)], axis=1
    )  # (n, 3, 3)
    norms = np.linalg.norm(cands, axis=2)  # (n, 3)
    best = np.argmax(norms, axis=1)
    rows = np.arange(m.shape[0])
    v = cands[rows, best]
    nrm = norms[rows, best]
    v = v / np.where(nrm > 0.0, nrm, 1.0)[:, None]
    return v, nrm


def _rayleigh(full: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ni,nij,nj->n", v, full, v)


def eig(a6: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition: (vals (n,3) ascending, vecs (n,3,3) columns).

    Analytic path: trigonometric eigenvalue seeds; the best-isolated extreme
    eigenvector comes from cross products of (A - lam I) plus two Rayleigh
    refinements, and the remaining pair is the closed-form eigensystem of
    the 2x2 restriction of A to the orthogonal complement.  The restriction
    step is what keeps near-equal pairs at the backward-stable floor -- the
    trig split alone is only ~sqrt(eps)*||A|| accurate, which would break
    the 1e-12(1+||A||) reconstruction contract.  Matrices whose gap product
    falls under DEGENERATE_DISC_FRACTION * ||A||^3 (or whose cross products
    collapse) are re-solved densely with np.linalg.eigh -- any orthonormal
    basis of a near-degenerate eigenspace reconstructs the matrix equally
    well, which is all downstream spectral functions need.
    """
    n = a6.shape[0]
    vals = eigvals(a6)
    full = sym_to_full(a6)
    anorm = np.sqrt(np.maximum(frob(a6, a6), 0.0))

    g12 = vals[:, 1] - vals[:, 0]
    g23 = vals[:, 2] - vals[:, 1]
    disc = g12 * g23 * (g12 + g23)
    degen = disc < DEGENERATE_DISC_FRACTION * anorm**3
    degen |= anorm == 0.0

    iso_low = g12 >= g23
    lam_a = np.where(iso_low, vals[:, 0], vals[:, 2])

    na = np.zeros(n, dtype=a6.dtype)
    va = np.zeros((n, 3), dtype=a6.dtype)
    for _ in range(2):
        va, na = _null_vec(full, lam_a)
        lam_a = _rayleigh(full, va)

    # cross products that collapsed relative to the matrix scale mean a
    # full cluster; those rows go to the dense solver
    degen |= na <= 1e-12 * anorm * anorm

    # orthonormal complement of va, seeded from the least-aligned axis
    axis = np.argmin(np.abs(va), axis=1)
    e = np.zeros((n, 3), dtype=a6.dtype)
    e[np.arange(n), axis] = 1.0
    t1 = e - np.sum(e * va, axis=1)[:, None] * va
    t1 /= np.maximum(np.linalg.norm(t1, axis=1), 1e-300)[:, None]
    t2 = np.cross(va, t1)

    # closed-form eigensystem of the complement-restricted 2x2 matrix
    at1 = np.matmul(full, t1[:, :, None])[:, :, 0]
    at2 = np.matmul(full, t2[:, :, None])[:, :, 0]
    h11 = np.sum(t1 * at1, axis=1)
    h12 = np.sum(t1 * at2, axis=1)
    h22 = np.sum(t2 * at2, axis=1)
    theta = 0.5 * np.arctan2(2.0 * h12, h11 - h22)
    c, s = np.cos(theta), np.sin(theta)
    w1 = c[:, None] * t1 + s[:, None] * t2
    w2 = -s[:, None] * t1 + c[:, None] * t2
    l1 = c * c * h11 + 2.0 * c * s * h12 + s * s * h22
    l2 = s * s * h11 - 2.0 * c * s * h12 + c * c * h22

    vals = np.stack([lam_a, l1, l2], axis=1)
    vecs = np.stack([va, w1, w2], axis=2)
    order = np.argsort(vals, axis=1, kind="stable")
    vals = np.take_along_axis(vals, order, axis=1)
    vecs = np.take_along_axis(vecs, order[:, None, :], axis=2)

    # exact-diagonal branch: permutation eigenvectors, bitwise eigenvalues
    p1 = a6[:, 3] ** 2 + a6[:, 4] ** 2 + a6[:, 5] ** 2
    diag_exact = p1 == 0.0
    if np.any(diag_exact):
        rows = np.nonzero(diag_exact)[0]
        order = np.argsort(a6[rows][:, :3], axis=1, kind="stable")
        vals[rows] = np.take_along_axis(a6[rows][:, :3], order, axis=1)
        pv = np.zeros((rows.size, 3, 3), dtype=a6.dtype)
        rr = np.arange(rows.size)[:, None]
        pv[rr, order, np.arange(3)[None, :]] = 1.0
        vecs[rows] = pv
        degen[rows] = False

    if np.any(degen):
        rows = np.nonzero(degen)[0]
        dv, dq = np.linalg.eigh(full[rows])
        vals[rows] = dv
        vecs[rows] = dq
    return vals, vecs


def _reconstruct(vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    m = np.matmul(vecs * vals[:, None, :], np.swapaxes(vecs, 1, 2))
    return full_to_sym(m)


MATFUNC_POW = 0
MATFUNC_LOG = 1
MATFUNC_EXP = 2


def matfunc(a6: np.ndarray, mode: int, p: float = 1.0) -> tuple[np.ndarray, float]:
    """Spectral matrix function.  Returns (result6, min_eigenvalue).

    mode MATFUNC_POW: A^p; MATFUNC_LOG: log A; MATFUNC_EXP: exp A.
    Domain checking (SPD requirements for logs / fractional / negative
    powers) is done by the caller using the returned minimum eigenvalue.
    """
    vals, vecs = eig(a6)
    lam_min = float(vals[:, 0].min()) if vals.size else np.inf
    if mode == MATFUNC_POW:
        f = np.power(vals, p)
    elif mode == MATFUNC_LOG:
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.log(vals)
    elif mode == MATFUNC_EXP:
        f = np.exp(vals)
    else:  # pragma: no cover - internal misuse
        raise ValueError(f"unknown matfunc mode {mode}")
    return _reconstruct(f, vecs), lam_min


def lambda_min(a6: np.ndarray) -> np.ndarray:
    return eigvals(a6)[:, 0]


def cutoff(a6: np.ndarray, eps: float) -> np.ndarray:
    """Source cutoff factor: max(0, lam_min - eps) / (lam_min (1 + eps |A|^3)),
    defined as 0 whenever lam_min <= eps (covers lam_min <= 0)."""
    lam = lambda_min(a6)
    if eps == 0.0:
        return (lam > 0.0).astype(a6.dtype)
    fro3 = np.maximum(frob(a6, a6), 0.0) ** 1.5
    denom = lam * (1.0 + eps * fro3)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (lam - eps) / denom
    return np.where(lam > eps, r, 0.0)


def poly_combo(a6: np.ndarray, c1: float, c2: float) -> np.ndarray:
    """c1 (A - I) + c2 (A^2 - A): shared shape of the elastic stress and the
    relaxation polynomial."""
    out = np.empty_like(a6)
    sq = square(a6) if c2 != 0.0 else None
    for i in range(6):
        ident = 1.0 if i < 3 else 0.0
        acc = c1 * (a6[:, i] - ident)
        if sq is not None:
            acc = acc + c2 * (sq[:, i] - a6[:, i])
        out[:, i] = acc
    return out


def objective_source(b6: np.ndarray, grad_v: np.ndarray, a_slip: float) -> np.ndarray:
    """Right-hand side of the objective derivative:

        a (D B + B D) + (W B - B W)  =  P + P^T,
        P = ((a+1)/2 G + (a-1)/2 G^T) @ B,   G = grad v (full, (n,3,3)).
    """
    geff = 0.5 * (a_slip + 1.0) * grad_v + 0.5 * (a_slip - 1.0) * np.swapaxes(
        grad_v, 1, 2
    )
    p = np.matmul(geff, sym_to_full(b6))
    return full_to_sym(p + np.swapaxes(p, 1, 2))


def free_energy(b6: np.ndarray, mu: float, gamma: float) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise free energy density.  Returns (psi, lam_min per cell).

    ln det is the sum of eigenvalue logs, never ln of an assembled
    determinant, so six-decade spectra cost no cancellation.  The
    refined spectrum (eig, not the raw trig seeds) matters here: seed
    eigenvalues carry O(sqrt(eps)*|A|) error on near-degenerate pairs,
    which the log turns into garbage for small eigenvalues.
    """
    vals, _ = eig(b6)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_part = np.sum(vals, axis=1) - 3.0 - np.sum(np.log(vals), axis=1)
    bm = b6.copy()
    bm[:, 0] -= 1.0
    bm[:, 1] -= 1.0
    bm[:, 2] -= 1.0
    quad_part = 0.5 * frob(bm, bm)
    psi = mu * ((1.0 - gamma) * log_part + gamma * quad_part)
    return psi, vals[:, 0]


def budget_pointwise(
    b6: np.ndarray,
    grads: np.ndarray,
    mu: float,
    gamma: float,
) -> dict[str, np.ndarray]:
    """Fused per-cell integrands of the dissipation bookkeeping.

    grads: (n, 3, 6) partial derivatives of the conformation field.
    Returns dict with per-cell arrays:
      grad_quad  = sum_d |d_d B|^2
      grad_log   = sum_d |B^(-1/2) d_d B B^(-1/2)|^2
      relax_log  = |B^(1/2) - B^(-1/2)|^2   (spectral: sum (s-1/s)^2, s=sqrt(lam))
      relax_quad = |B^(3/2) - B^(1/2)|^2
      dist_quad  = |B - I|^2
      psi        = free energy density
      lam_min
    """
    n = b6.shape[0]
    vals, vecs = eig(b6)
    lam = vals
    lam_min_arr = lam[:, 0]

    sq = np.sqrt(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_sq = 1.0 / sq
        relax_log = np.sum((sq - inv_sq) ** 2, axis=1)
        relax_quad = np.sum((lam * sq - sq) ** 2, axis=1)
        log_lam = np.log(lam)

    bm = b6.copy()
    bm[:, 0] -= 1.0
    bm[:, 1] -= 1.0
    bm[:, 2] -= 1.0
    dist_quad = frob(bm, bm)

    psi = mu * (
        (1.0 - gamma) * (np.sum(lam, axis=1) - 3.0 - np.sum(log_lam, axis=1))
        + gamma * (0.5 * dist_quad)
    )

    # B^(-1/2) sandwich, one factor reused across the three directions
    rootinv = np.matmul(vecs * inv_sq[:, None, :], np.swapaxes(vecs, 1, 2))
    grad_quad = np.zeros(n, dtype=b6.dtype)
    grad_log = np.zeros(n, dtype=b6.dtype)
    for d in range(3):
        g6 = np.ascontiguousarray(grads[:, d, :])
        grad_quad += frob(g6, g6)
        t = np.matmul(rootinv, np.matmul(sym_to_full(g6), rootinv))
        grad_log += np.einsum("nij,nij->n", t, t)

    return {
        "grad_quad": grad_quad,
        "grad_log": grad_log,
        "relax_log": relax_log,
        "relax_quad": relax_quad,
        "dist_quad": dist_quad,
        "psi": psi,
        "lam_min": lam_min_arr,
    }
