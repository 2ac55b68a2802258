"""Pure-numpy fallback for the hot CSR loops (see _kernels_numba).

reduceat/bincount keep per-segment accumulation sequential, so the two
backends agree to float tolerance on desk-scale data.
"""

import numpy as np


def _segment_sums(values, seg_starts, counts):
    # reduceat over the non-empty segments only; empty segments stay 0
    out = np.zeros(counts.size)
    nonempty = counts > 0
    if values.size:
        out[nonempty] = np.add.reduceat(values, seg_starts[nonempty])
    return out


def csr_matvec(indptr, indices, data, x):
    if data.size == 0:
        return np.zeros(indptr.size - 1)
    prods = data * x[indices]
    counts = np.diff(indptr)
    return _segment_sums(prods, indptr[:-1], counts)


def csr_rows_matvec(indptr, indices, data, rows, x):
    starts = indptr[rows]
    counts = indptr[rows + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.zeros(rows.size)
    offsets = np.zeros(rows.size, dtype=np.int64)
    np.cumsum(counts[:-1], out=offsets[1:])
    flat = np.arange(total, dtype=np.int64) - np.repeat(offsets, counts) + np.repeat(starts, counts)
    prods = data[flat] * x[indices[flat]]
    return _segment_sums(prods, offsets, counts)


def csr_rmatvec(indptr, indices, data, g, n_cols):
    if data.size == 0:
        return np.zeros(n_cols)
    g_expanded = np.repeat(g, np.diff(indptr))
    return np.bincount(indices, weights=data * g_expanded, minlength=n_cols)


def csr_dense_matmat(indptr, indices, data, dense_t):
    n = indptr.size - 1
    k = dense_t.shape[0]
    out = np.empty((n, k))
    for c in range(k):
        out[:, c] = csr_matvec(indptr, indices, data, dense_t[c])
    return out


def csr_scatter_rows(indptr, indices, data, assign, k, n_cols):
    if data.size == 0:
        return np.zeros((k, n_cols))
    assign_expanded = np.repeat(assign, np.diff(indptr))
    flat = np.bincount(assign_expanded * n_cols + indices, weights=data, minlength=k * n_cols)
    return flat.reshape(k, n_cols)
