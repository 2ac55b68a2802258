"""Hot CSR loops compiled with numba. Same signatures as _kernels_numpy.

All accumulations are sequential (no prange) so results are reproducible
run to run; the loops are fast enough without threading at this scale.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def csr_matvec(indptr, indices, data, x):
    n = indptr.size - 1
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            acc += data[j] * x[indices[j]]
        out[i] = acc
    return out


@njit(cache=True)
def csr_rows_matvec(indptr, indices, data, rows, x):
    out = np.zeros(rows.size)
    for r in range(rows.size):
        i = rows[r]
        acc = 0.0
        for j in range(indptr[i], indptr[i + 1]):
            acc += data[j] * x[indices[j]]
        out[r] = acc
    return out


@njit(cache=True)
def csr_rmatvec(indptr, indices, data, g, n_cols):
    out = np.zeros(n_cols)
    n = indptr.size - 1
    for i in range(n):
        gi = g[i]
        if gi != 0.0:
            for j in range(indptr[i], indptr[i + 1]):
                out[indices[j]] += data[j] * gi
    return out


@njit(cache=True)
def csr_dense_matmat(indptr, indices, data, dense_t):
    # dense_t has shape (k, n_cols); result is rows x k
    n = indptr.size - 1
    k = dense_t.shape[0]
    out = np.zeros((n, k))
    for i in range(n):
        for c in range(k):
            acc = 0.0
            for j in range(indptr[i], indptr[i + 1]):
                acc += data[j] * dense_t[c, indices[j]]
            out[i, c] = acc
    return out


@njit(cache=True)
def csr_scatter_rows(indptr, indices, data, assign, k, n_cols):
    # accumulate each row into the dense bucket given by assign[i]
    out = np.zeros((k, n_cols))
    n = indptr.size - 1
    for i in range(n):
        a = assign[i]
        for j in range(indptr[i], indptr[i + 1]):
            out[a, indices[j]] += data[j]
    return out
