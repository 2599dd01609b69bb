"""Numba-compiled kernels mirroring `_pointwise_numpy`.

Per-cell scalar code, parallelized over cells with prange.  Import of this
module requires numba; `spd_algebra` only imports it when the backend lane
says so.  Reductions are deliberately left to the caller (kernels fill
per-cell arrays) so results do not depend on the thread count.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

DEGENERATE_DISC_FRACTION = 1e-14
_TWO_PI_3 = 2.0943951023931953


@njit(cache=True, inline="always")
def _eigvals_one(a0, a1, a2, a3, a4, a5):
    p1 = a3 * a3 + a4 * a4 + a5 * a5
    if p1 == 0.0:
        # sort by swaps only: mid must be bitwise one of the inputs, and
        # sum-minus-extremes arithmetic can round it off by an ulp
        lo, mid, hi = a0, a1, a2
        if lo > mid:
            lo, mid = mid, lo
        if mid > hi:
            mid, hi = hi, mid
        if lo > mid:
            lo, mid = mid, lo
        return lo, mid, hi
    q = (a0 + a1 + a2) / 3.0
    d0 = a0 - q
    d1 = a1 - q
    d2 = a2 - q
    p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    b0 = d0 / p
    b1 = d1 / p
    b2 = d2 / p
    b3 = a3 / p
    b4 = a4 / p
    b5 = a5 / p
    r = 0.5 * (
        b0 * (b1 * b2 - b5 * b5)
        - b3 * (b3 * b2 - b5 * b4)
        + b4 * (b3 * b5 - b1 * b4)
    )
    if r > 1.0:
        r = 1.0
    elif r < -1.0:
        r = -1.0
    phi = np.arccos(r) / 3.0
    hi = q + 2.0 * p * np.cos(phi)
    lo = q + 2.0 * p * np.cos(phi + _TWO_PI_3)
    return lo, 3.0 * q - hi - lo, hi


@njit(cache=True)
def _jacobi3(a6, vals, vecs):
    """Cyclic Jacobi sweeps for one matrix; fills vals (ascending) and vecs."""
    a = np.empty((3, 3))
    a[0, 0] = a6[0]
    a[1, 1] = a6[1]
    a[2, 2] = a6[2]
    a[0, 1] = a[1, 0] = a6[3]
    a[0, 2] = a[2, 0] = a6[4]
    a[1, 2] = a[2, 1] = a6[5]
    q = np.eye(3)
    for _ in range(30):
        off = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
        diag = a[0, 0] ** 2 + a[1, 1] ** 2 + a[2, 2] ** 2
        if off <= 1e-32 * (diag + off) + 1e-300:
            break
        for p in range(2):
            for r in range(p + 1, 3):
                apr = a[p, r]
                if apr == 0.0:
                    continue
                theta = 0.5 * np.arctan2(2.0 * apr, a[r, r] - a[p, p])
                c = np.cos(theta)
                s = np.sin(theta)
                for k in range(3):
                    akp = a[k, p]
                    akr = a[k, r]
                    a[k, p] = c * akp - s * akr
                    a[k, r] = s * akp + c * akr
                for k in range(3):
                    apk = a[p, k]
                    ark = a[r, k]
                    a[p, k] = c * apk - s * ark
                    a[r, k] = s * apk + c * ark
                for k in range(3):
                    qkp = q[k, p]
                    qkr = q[k, r]
                    q[k, p] = c * qkp - s * qkr
                    q[k, r] = s * qkp + c * qkr
    # insertion sort of the three eigenpairs, ascending
    for i in range(3):
        vals[i] = a[i, i]
    order = np.array([0, 1, 2])
    for i in range(1, 3):
        j = i
        while j > 0 and vals[order[j - 1]] > vals[order[j]]:
            tmp = order[j]
            order[j] = order[j - 1]
            order[j - 1] = tmp
            j -= 1
    v0, v1, v2 = vals[order[0]], vals[order[1]], vals[order[2]]
    vals[0], vals[1], vals[2] = v0, v1, v2
    for k in range(3):
        vecs[k, 0] = q[k, order[0]]
        vecs[k, 1] = q[k, order[1]]
        vecs[k, 2] = q[k, order[2]]


@njit(cache=True, inline="always")
def _cross(x0, x1, x2, y0, y1, y2):
    return x1 * y2 - x2 * y1, x2 * y0 - x0 * y2, x0 * y1 - x1 * y0


@njit(cache=True)
def _null_vec_one(a6, lam):
    """Best-conditioned column cross product of (A - lam I); returns
    (v0, v1, v2, norm) with v normalized when norm > 0."""
    m00 = a6[0] - lam
    m11 = a6[1] - lam
    m22 = a6[2] - lam
    m01 = a6[3]
    m02 = a6[4]
    m12 = a6[5]
    # columns: c0 = (m00, m01, m02), c1 = (m01, m11, m12), c2 = (m02, m12, m22)
    u0, u1, u2 = _cross(m00, m01, m02, m01, m11, m12)
    v0, v1, v2 = _cross(m00, m01, m02, m02, m12, m22)
    w0, w1, w2 = _cross(m01, m11, m12, m02, m12, m22)
    nu = u0 * u0 + u1 * u1 + u2 * u2
    nv = v0 * v0 + v1 * v1 + v2 * v2
    nw = w0 * w0 + w1 * w1 + w2 * w2
    if nu >= nv and nu >= nw:
        b0, b1, b2, nn = u0, u1, u2, nu
    elif nv >= nw:
        b0, b1, b2, nn = v0, v1, v2, nv
    else:
        b0, b1, b2, nn = w0, w1, w2, nw
    nn = np.sqrt(nn)
    if nn > 0.0:
        b0 /= nn
        b1 /= nn
        b2 /= nn
    return b0, b1, b2, nn


@njit(cache=True, inline="always")
def _rq_one(a6, v0, v1, v2):
    w0 = a6[0] * v0 + a6[3] * v1 + a6[4] * v2
    w1 = a6[3] * v0 + a6[1] * v1 + a6[5] * v2
    w2 = a6[4] * v0 + a6[5] * v1 + a6[2] * v2
    return v0 * w0 + v1 * w1 + v2 * w2


@njit(cache=True)
def _eig_one(a6, vals, vecs):
    lo, mid, hi = _eigvals_one(a6[0], a6[1], a6[2], a6[3], a6[4], a6[5])

    p1 = a6[3] ** 2 + a6[4] ** 2 + a6[5] ** 2
    if p1 == 0.0:
        # diagonal: permutation eigenvectors, eigenvalues bitwise exact
        vals[0] = lo
        vals[1] = mid
        vals[2] = hi
        for k in range(3):
            for j in range(3):
                vecs[k, j] = 0.0
        d0, d1, d2 = a6[0], a6[1], a6[2]
        used0 = False
        used1 = False
        for j in range(3):
            t = vals[j]
            if not used0 and t == d0:
                vecs[0, j] = 1.0
                used0 = True
            elif not used1 and t == d1:
                vecs[1, j] = 1.0
                used1 = True
            else:
                vecs[2, j] = 1.0
        return

    fro2 = (
        a6[0] ** 2
        + a6[1] ** 2
        + a6[2] ** 2
        + 2.0 * p1
    )
    anorm = np.sqrt(fro2)
    g12 = mid - lo
    g23 = hi - mid
    disc = g12 * g23 * (g12 + g23)
    if disc < DEGENERATE_DISC_FRACTION * anorm * anorm * anorm:
        _jacobi3(a6, vals, vecs)
        return

    # trig value of the best-isolated extreme seeds two rounds of
    # null-vector + Rayleigh refinement; the remaining pair comes from the
    # closed-form 2x2 eigensystem on the orthogonal complement, which keeps
    # near-equal pairs at the backward-stable floor (the trig split alone
    # is only ~sqrt(eps)*||A|| accurate)
    if g12 >= g23:
        lam_a = lo
    else:
        lam_a = hi
    a0 = a1 = a2 = 0.0
    na = 0.0
    for _ in range(2):
        a0, a1, a2, na = _null_vec_one(a6, lam_a)
        lam_a = _rq_one(a6, a0, a1, a2)

    if na <= 1e-12 * fro2:
        _jacobi3(a6, vals, vecs)
        return

    # orthonormal complement of va, seeded from the least-aligned axis
    aa0, aa1, aa2 = abs(a0), abs(a1), abs(a2)
    if aa0 <= aa1 and aa0 <= aa2:
        t0, t1, t2 = 1.0 - a0 * a0, -a0 * a1, -a0 * a2
    elif aa1 <= aa2:
        t0, t1, t2 = -a1 * a0, 1.0 - a1 * a1, -a1 * a2
    else:
        t0, t1, t2 = -a2 * a0, -a2 * a1, 1.0 - a2 * a2
    tn = np.sqrt(t0 * t0 + t1 * t1 + t2 * t2)
    t0 /= tn
    t1 /= tn
    t2 /= tn
    u0, u1, u2 = _cross(a0, a1, a2, t0, t1, t2)

    # closed-form eigensystem of the complement-restricted 2x2 matrix
    p0 = a6[0] * t0 + a6[3] * t1 + a6[4] * t2
    p1x = a6[3] * t0 + a6[1] * t1 + a6[5] * t2
    p2 = a6[4] * t0 + a6[5] * t1 + a6[2] * t2
    q0 = a6[0] * u0 + a6[3] * u1 + a6[4] * u2
    q1 = a6[3] * u0 + a6[1] * u1 + a6[5] * u2
    q2 = a6[4] * u0 + a6[5] * u1 + a6[2] * u2
    h11 = t0 * p0 + t1 * p1x + t2 * p2
    h12 = t0 * q0 + t1 * q1 + t2 * q2
    h22 = u0 * q0 + u1 * q1 + u2 * q2
    theta = 0.5 * np.arctan2(2.0 * h12, h11 - h22)
    c = np.cos(theta)
    s = np.sin(theta)
    w10 = c * t0 + s * u0
    w11 = c * t1 + s * u1
    w12 = c * t2 + s * u2
    w20 = -s * t0 + c * u0
    w21 = -s * t1 + c * u1
    w22 = -s * t2 + c * u2
    l1 = c * c * h11 + 2.0 * c * s * h12 + s * s * h22
    l2 = s * s * h11 - 2.0 * c * s * h12 + c * c * h22

    vals[0] = lam_a
    vals[1] = l1
    vals[2] = l2
    vecs[0, 0] = a0
    vecs[1, 0] = a1
    vecs[2, 0] = a2
    vecs[0, 1] = w10
    vecs[1, 1] = w11
    vecs[2, 1] = w12
    vecs[0, 2] = w20
    vecs[1, 2] = w21
    vecs[2, 2] = w22

    for i in range(1, 3):
        j = i
        while j > 0 and vals[j - 1] > vals[j]:
            vals[j - 1], vals[j] = vals[j], vals[j - 1]
            for k in range(3):
                vecs[k, j - 1], vecs[k, j] = vecs[k, j], vecs[k, j - 1]
            j -= 1


@njit(cache=True, parallel=True)
def eigvals_field(a6, out):
    for i in prange(a6.shape[0]):
        lo, mid, hi = _eigvals_one(
            a6[i, 0], a6[i, 1], a6[i, 2], a6[i, 3], a6[i, 4], a6[i, 5]
        )
        out[i, 0] = lo
        out[i, 1] = mid
        out[i, 2] = hi


@njit(cache=True, parallel=True)
def eig_field(a6, vals, vecs):
    for i in prange(a6.shape[0]):
        _eig_one(a6[i], vals[i], vecs[i])


@njit(cache=True, inline="always")
def _reconstruct_one(f0, f1, f2, vecs, out):
    # out = Q diag(f) Q^T, packed; symmetric by construction
    q00, q01, q02 = vecs[0, 0], vecs[0, 1], vecs[0, 2]
    q10, q11, q12 = vecs[1, 0], vecs[1, 1], vecs[1, 2]
    q20, q21, q22 = vecs[2, 0], vecs[2, 1], vecs[2, 2]
    out[0] = f0 * q00 * q00 + f1 * q01 * q01 + f2 * q02 * q02
    out[1] = f0 * q10 * q10 + f1 * q11 * q11 + f2 * q12 * q12
    out[2] = f0 * q20 * q20 + f1 * q21 * q21 + f2 * q22 * q22
    out[3] = f0 * q00 * q10 + f1 * q01 * q11 + f2 * q02 * q12
    out[4] = f0 * q00 * q20 + f1 * q01 * q21 + f2 * q02 * q22
    out[5] = f0 * q10 * q20 + f1 * q11 * q21 + f2 * q12 * q22


MATFUNC_POW = 0
MATFUNC_LOG = 1
MATFUNC_EXP = 2


@njit(cache=True, parallel=True)
def matfunc_field(a6, mode, p, out, lam_min_out):
    vals = np.empty((a6.shape[0], 3))
    vecs = np.empty((a6.shape[0], 3, 3))
    for i in prange(a6.shape[0]):
        _eig_one(a6[i], vals[i], vecs[i])
        lam_min_out[i] = vals[i, 0]
        if mode == MATFUNC_POW:
            f0 = vals[i, 0] ** p
            f1 = vals[i, 1] ** p
            f2 = vals[i, 2] ** p
        elif mode == MATFUNC_LOG:
            f0 = np.log(vals[i, 0])
            f1 = np.log(vals[i, 1])
            f2 = np.log(vals[i, 2])
        else:
            f0 = np.exp(vals[i, 0])
            f1 = np.exp(vals[i, 1])
            f2 = np.exp(vals[i, 2])
        _reconstruct_one(f0, f1, f2, vecs[i], out[i])


@njit(cache=True, parallel=True)
def cutoff_field(a6, eps, out):
    for i in prange(a6.shape[0]):
        lam, _, _ = _eigvals_one(
            a6[i, 0], a6[i, 1], a6[i, 2], a6[i, 3], a6[i, 4], a6[i, 5]
        )
        if eps == 0.0:
            out[i] = 1.0 if lam > 0.0 else 0.0
        elif lam > eps:
            fro2 = (
                a6[i, 0] ** 2
                + a6[i, 1] ** 2
                + a6[i, 2] ** 2
                + 2.0 * (a6[i, 3] ** 2 + a6[i, 4] ** 2 + a6[i, 5] ** 2)
            )
            out[i] = (lam - eps) / (lam * (1.0 + eps * fro2 * np.sqrt(fro2)))
        else:
            out[i] = 0.0


@njit(cache=True, parallel=True)
def poly_field(a6, c1, c2, out):
    for i in prange(a6.shape[0]):
        a0, a1, a2, a3, a4, a5 = (
            a6[i, 0],
            a6[i, 1],
            a6[i, 2],
            a6[i, 3],
            a6[i, 4],
            a6[i, 5],
        )
        if c2 != 0.0:
            s0 = a0 * a0 + a3 * a3 + a4 * a4
            s1 = a3 * a3 + a1 * a1 + a5 * a5
            s2 = a4 * a4 + a5 * a5 + a2 * a2
            s3 = a0 * a3 + a3 * a1 + a4 * a5
            s4 = a0 * a4 + a3 * a5 + a4 * a2
            s5 = a3 * a4 + a1 * a5 + a5 * a2
        else:
            s0 = s1 = s2 = s3 = s4 = s5 = 0.0
        out[i, 0] = c1 * (a0 - 1.0) + c2 * (s0 - a0)
        out[i, 1] = c1 * (a1 - 1.0) + c2 * (s1 - a1)
        out[i, 2] = c1 * (a2 - 1.0) + c2 * (s2 - a2)
        out[i, 3] = c1 * a3 + c2 * (s3 - a3)
        out[i, 4] = c1 * a4 + c2 * (s4 - a4)
        out[i, 5] = c1 * a5 + c2 * (s5 - a5)


@njit(cache=True, parallel=True)
def objective_source_field(b6, grad_v, a_slip, out):
    ca = 0.5 * (a_slip + 1.0)
    cb = 0.5 * (a_slip - 1.0)
    for i in prange(b6.shape[0]):
        b0, b1, b2, b3, b4, b5 = (
            b6[i, 0],
            b6[i, 1],
            b6[i, 2],
            b6[i, 3],
            b6[i, 4],
            b6[i, 5],
        )
        # P = (ca G + cb G^T) B ; out = P + P^T
        g00 = (ca + cb) * grad_v[i, 0, 0]
        g11 = (ca + cb) * grad_v[i, 1, 1]
        g22 = (ca + cb) * grad_v[i, 2, 2]
        g01 = ca * grad_v[i, 0, 1] + cb * grad_v[i, 1, 0]
        g02 = ca * grad_v[i, 0, 2] + cb * grad_v[i, 2, 0]
        g10 = ca * grad_v[i, 1, 0] + cb * grad_v[i, 0, 1]
        g12 = ca * grad_v[i, 1, 2] + cb * grad_v[i, 2, 1]
        g20 = ca * grad_v[i, 2, 0] + cb * grad_v[i, 0, 2]
        g21 = ca * grad_v[i, 2, 1] + cb * grad_v[i, 1, 2]
        p00 = g00 * b0 + g01 * b3 + g02 * b4
        p11 = g10 * b3 + g11 * b1 + g12 * b5
        p22 = g20 * b4 + g21 * b5 + g22 * b2
        p01 = g00 * b3 + g01 * b1 + g02 * b5
        p10 = g10 * b0 + g11 * b3 + g12 * b4
        p02 = g00 * b4 + g01 * b5 + g02 * b2
        p20 = g20 * b0 + g21 * b3 + g22 * b4
        p12 = g10 * b4 + g11 * b5 + g12 * b2
        p21 = g20 * b3 + g21 * b1 + g22 * b5
        out[i, 0] = 2.0 * p00
        out[i, 1] = 2.0 * p11
        out[i, 2] = 2.0 * p22
        out[i, 3] = p01 + p10
        out[i, 4] = p02 + p20
        out[i, 5] = p12 + p21


@njit(cache=True, parallel=True)
def free_energy_field(b6, mu, gamma, psi_out, lam_min_out):
    # ln det = sum of eigenvalue logs; the refined spectrum is required
    # (trig seeds lose half the digits on near-degenerate pairs, which the
    # log amplifies for small eigenvalues).
    for i in prange(b6.shape[0]):
        vals = np.empty(3)
        vecs = np.empty((3, 3))
        _eig_one(b6[i], vals, vecs)
        lam_min_out[i] = vals[0]
        log_part = (vals[0] + vals[1] + vals[2]) - 3.0 - (
            np.log(vals[0]) + np.log(vals[1]) + np.log(vals[2])
        )
        d0 = b6[i, 0] - 1.0
        d1 = b6[i, 1] - 1.0
        d2 = b6[i, 2] - 1.0
        dq = (
            d0 * d0
            + d1 * d1
            + d2 * d2
            + 2.0 * (b6[i, 3] ** 2 + b6[i, 4] ** 2 + b6[i, 5] ** 2)
        )
        psi_out[i] = mu * ((1.0 - gamma) * log_part + gamma * (0.5 * dq))


@njit(cache=True, parallel=True)
def budget_field(
    b6,
    grads,
    mu,
    gamma,
    grad_quad,
    grad_log,
    relax_log,
    relax_quad,
    dist_quad,
    psi,
    lam_min_out,
):
    for i in prange(b6.shape[0]):
        vals = np.empty(3)
        vecs = np.empty((3, 3))
        _eig_one(b6[i], vals, vecs)
        lam_min_out[i] = vals[0]

        s0 = np.sqrt(vals[0])
        s1 = np.sqrt(vals[1])
        s2 = np.sqrt(vals[2])
        relax_log[i] = (
            (s0 - 1.0 / s0) ** 2 + (s1 - 1.0 / s1) ** 2 + (s2 - 1.0 / s2) ** 2
        )
        relax_quad[i] = (
            (vals[0] * s0 - s0) ** 2
            + (vals[1] * s1 - s1) ** 2
            + (vals[2] * s2 - s2) ** 2
        )
        d0 = b6[i, 0] - 1.0
        d1 = b6[i, 1] - 1.0
        d2 = b6[i, 2] - 1.0
        dq = (
            d0 * d0
            + d1 * d1
            + d2 * d2
            + 2.0 * (b6[i, 3] ** 2 + b6[i, 4] ** 2 + b6[i, 5] ** 2)
        )
        dist_quad[i] = dq

        # same spectral form as free_energy_field (same refined vals)
        log_part = (vals[0] + vals[1] + vals[2]) - 3.0 - (
            np.log(vals[0]) + np.log(vals[1]) + np.log(vals[2])
        )
        psi[i] = mu * ((1.0 - gamma) * log_part + gamma * (0.5 * dq))

        # R = B^(-1/2)
        r6 = np.empty(6)
        _reconstruct_one(1.0 / s0, 1.0 / s1, 1.0 / s2, vecs, r6)
        r00, r11, r22 = r6[0], r6[1], r6[2]
        r01, r02, r12 = r6[3], r6[4], r6[5]

        gq = 0.0
        gl = 0.0
        for d in range(3):
            g0 = grads[i, d, 0]
            g1 = grads[i, d, 1]
            g2 = grads[i, d, 2]
            g3 = grads[i, d, 3]
            g4 = grads[i, d, 4]
            g5 = grads[i, d, 5]
            gq += (
                g0 * g0
                + g1 * g1
                + g2 * g2
                + 2.0 * (g3 * g3 + g4 * g4 + g5 * g5)
            )
            # T = R G R (symmetric); accumulate |T|^2
            # M = R G
            m00 = r00 * g0 + r01 * g3 + r02 * g4
            m01 = r00 * g3 + r01 * g1 + r02 * g5
            m02 = r00 * g4 + r01 * g5 + r02 * g2
            m10 = r01 * g0 + r11 * g3 + r12 * g4
            m11 = r01 * g3 + r11 * g1 + r12 * g5
            m12 = r01 * g4 + r11 * g5 + r12 * g2
            m20 = r02 * g0 + r12 * g3 + r22 * g4
            m21 = r02 * g3 + r12 * g1 + r22 * g5
            m22 = r02 * g4 + r12 * g5 + r22 * g2
            t00 = m00 * r00 + m01 * r01 + m02 * r02
            t01 = m00 * r01 + m01 * r11 + m02 * r12
            t02 = m00 * r02 + m01 * r12 + m02 * r22
            t11 = m10 * r01 + m11 * r11 + m12 * r12
            t12 = m10 * r02 + m11 * r12 + m12 * r22
            t22 = m20 * r02 + m21 * r12 + m22 * r22
            gl += (
                t00 * t00
                + t11 * t11
                + t22 * t22
                + 2.0 * (t01 * t01 + t02 * t02 + t12 * t12)
            )
        grad_quad[i] = gq
        grad_log[i] = gl
