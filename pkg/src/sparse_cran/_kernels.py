"""Compiled per-user loops for the dual evaluation in :mod:`sparse_cran.qcqp`.

Each user's system ``(A_k + diag(W_k nu)) x_k = b_k`` is at most a few
tens of unknowns, so a hand-written Cholesky beats batched LAPACK calls,
whose per-matrix dispatch cost dominates at these sizes.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _factor(A, d, m, Lf):
    for j in range(m):
        s = A[j, j].real + d[j]
        for p in range(j):
            s -= Lf[j, p].real ** 2 + Lf[j, p].imag ** 2
        if s <= 0.0:
            s = 1e-300
        r = np.sqrt(s)
        Lf[j, j] = r
        for i in range(j + 1, m):
            z = A[i, j]
            for p in range(j):
                z -= Lf[i, p] * np.conj(Lf[j, p])
            Lf[i, j] = z / r


@njit(cache=True)
def dual_eval(A, b, W, cols, ncols, counts, nu, x, f, Lf):
    """Fill ``x`` and ``f``; return ``sum_k Re(b_k^H x_k)``. Factors go to ``Lf``."""
    K, n = b.shape
    for c in range(f.shape[0]):
        f[c] = 0.0
    total = 0.0
    d = np.zeros(n)
    y = np.zeros(n, dtype=np.complex128)
    for k in range(K):
        m = counts[k]
        if m == 0:
            continue
        for i in range(m):
            s = 0.0
            for q in range(ncols[k]):
                c = cols[k, q]
                s += W[k, i, c] * nu[c]
            d[i] = s
        _factor(A[k], d, m, Lf[k])
        L = Lf[k]
        for i in range(m):
            z = b[k, i]
            for p in range(i):
                z -= L[i, p] * y[p]
            y[i] = z / L[i, i].real
        for i in range(m - 1, -1, -1):
            z = y[i]
            for p in range(i + 1, m):
                z -= np.conj(L[p, i]) * x[k, p]
            x[k, i] = z / L[i, i].real
        for i in range(m):
            p2 = x[k, i].real ** 2 + x[k, i].imag ** 2
            total += (np.conj(b[k, i]) * x[k, i]).real
            for q in range(ncols[k]):
                c = cols[k, q]
                f[c] += W[k, i, c] * p2
    return total


@njit(cache=True)
def dual_hessian(W, cols, ncols, counts, x, Lf, H):
    """Accumulate ``-2 Re W_k^T diag(conj x) M_k^{-1} diag(x) W_k`` into ``H``."""
    K, n = x.shape
    nc = H.shape[0]
    for a in range(nc):
        for b_ in range(nc):
            H[a, b_] = 0.0
    Linv = np.zeros((n, n), dtype=np.complex128)
    Minv = np.zeros((n, n), dtype=np.complex128)
    V = np.zeros((nc, n), dtype=np.complex128)
    for k in range(K):
        m = counts[k]
        if m == 0 or ncols[k] == 0:
            continue
        L = Lf[k]
        for j in range(m):
            for i in range(m):
                Linv[i, j] = 0.0
            Linv[j, j] = 1.0 / L[j, j].real
            for i in range(j + 1, m):
                z = 0.0 + 0.0j
                for p in range(j, i):
                    z -= L[i, p] * Linv[p, j]
                Linv[i, j] = z / L[i, i].real
        # M^{-1} = Linv^H Linv
        for i in range(m):
            for j in range(m):
                z = 0.0 + 0.0j
                for p in range(max(i, j), m):
                    z += np.conj(Linv[p, i]) * Linv[p, j]
                Minv[i, j] = z
        for q in range(ncols[k]):
            c = cols[k, q]
            for j in range(m):
                z = 0.0 + 0.0j
                for i in range(m):
                    z += W[k, i, c] * np.conj(x[k, i]) * Minv[i, j]
                V[q, j] = z * x[k, j]
        for q in range(ncols[k]):
            c1 = cols[k, q]
            for r in range(ncols[k]):
                c2 = cols[k, r]
                s = 0.0
                for j in range(m):
                    s += (V[q, j] * W[k, j, c2]).real
                H[c1, c2] -= 2.0 * s
