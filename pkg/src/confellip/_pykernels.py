"""NumPy implementation of the hot kernels (fallback for the Cython module).

Both backends expose the same two functions with identical semantics; see
:mod:`confellip.kernels` for the contracts.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 1 << 22  # max n * m doubles materialized at once by exact_membership


def ccle_batch(V, k, n_alpha, lam):
    V = np.ascontiguousarray(V, dtype=np.float64)
    m, n1, p = V.shape
    n = n1 - 1
    calib = V[:, :n, :]
    mean = calib.mean(axis=1)
    B = calib - mean[:, None, :]
    sig = np.einsum("mni,mnj->mij", B, B) / n + lam * np.eye(p)

    status = np.zeros(m, dtype=np.int32)
    q = np.full(m, np.nan)
    mahal_x = np.full(m, np.nan)
    logdet_a = np.full(m, np.nan)
    resid = np.full(m, np.nan)

    diag = np.diagonal(sig, axis1=1, axis2=2)
    thresh = p * np.finfo(float).eps * diag.max(axis=1)
    ok = np.ones(m, dtype=bool)
    L = np.empty_like(sig)
    try:
        L[:] = np.linalg.cholesky(sig)
    except np.linalg.LinAlgError:
        for j in range(m):
            try:
                L[j] = np.linalg.cholesky(sig[j])
            except np.linalg.LinAlgError:
                ok[j] = False
                L[j] = np.eye(p)
    piv = np.diagonal(L, axis1=1, axis2=2) ** 2
    ok &= piv.min(axis=1) > thresh
    status[~ok] = 1
    if not ok.any():
        return q, mahal_x, logdet_a, resid, status

    Y = np.linalg.solve(L, B.transpose(0, 2, 1))  # (m, p, n)
    lev = np.einsum("mpn,mpn->mn", Y, Y) / n
    q_all = n * np.partition(lev, n_alpha - 1, axis=1)[:, n_alpha - 1]

    v = V[:, n, :] - mean
    u = np.linalg.solve(L, v[..., None])[..., 0]
    full = np.einsum("mi,mi->m", u, u)
    mx = np.einsum("mi,mi->m", u[:, :k], u[:, :k])
    ld = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)[:, k:]), axis=1)

    q[ok] = q_all[ok]
    mahal_x[ok] = mx[ok]
    logdet_a[ok] = ld[ok]
    resid[ok] = (full - mx)[ok]
    return q, mahal_x, logdet_a, resid, status


def exact_membership(G, H, w, cdiag, R, n_alpha):
    G = np.asarray(G, dtype=np.float64)
    H = np.asarray(H, dtype=np.float64)
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    w = np.asarray(w, dtype=np.float64)
    cdiag = np.asarray(cdiag, dtype=np.float64)
    n = G.shape[0]
    m = R.shape[0]
    d = np.einsum("mi,ij,mj->m", R, H, R) / n
    s_last = n * (n / (n + 1.0)) * d / (1.0 + d)
    thresh = np.empty(m)
    step = max(1, _CHUNK // max(n, 1))
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        b = (G @ R[lo:hi].T) / n - w[:, None]  # (n, chunk)
        s = n * cdiag[:, None] - n * b * b / (1.0 + d[lo:hi])
        thresh[lo:hi] = np.partition(s, n_alpha - 1, axis=0)[n_alpha - 1]
    member = (s_last <= thresh).astype(np.uint8)
    return member, s_last, thresh
