"""Minimal CSR sparse containers used by the feature and membership matrices.

Indices are int64 and values float64 throughout so the numba kernels see a
single signature. Rows are immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SparseVector:
    """One sparse row: strictly increasing indices, no explicit zeros."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "indices", np.asarray(self.indices, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.indices.shape != self.values.shape:
            raise ValueError("indices and values must have equal length")
        if self.indices.size and np.any(np.diff(self.indices) <= 0):
            raise ValueError("indices must be strictly increasing")
        if np.any(self.values == 0.0):
            raise ValueError("explicit zeros are not allowed")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values * self.values)))

    def scaled(self, factor: float) -> "SparseVector":
        return SparseVector(self.indices, self.values * factor)

    def dot_dense(self, x: np.ndarray) -> float:
        return float(np.sum(self.values * x[self.indices]))

    def to_dense(self, n_cols: int) -> np.ndarray:
        out = np.zeros(n_cols)
        out[self.indices] = self.values
        return out


class CSRMatrix:
    """Compressed sparse rows. `indptr` has n_rows+1 entries."""

    __slots__ = ("indptr", "indices", "data", "n_cols")

    def __init__(self, indptr, indices, data, n_cols: int):
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=np.float64)
        self.n_cols = int(n_cols)
        if self.indptr[0] != 0 or self.indptr[-1] != self.indices.size:
            raise ValueError("inconsistent indptr")
        if self.indices.size and self.indices.max() >= self.n_cols:
            raise ValueError("column index out of range")

    @property
    def n_rows(self) -> int:
        return self.indptr.size - 1

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def row(self, i: int) -> SparseVector:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return SparseVector(self.indices[lo:hi].copy(), self.data[lo:hi].copy())

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.indptr)

    def sub_rows(self, rows) -> "CSRMatrix":
        """Gather a row subset into a new matrix (row order follows `rows`)."""
        rows = np.asarray(rows, dtype=np.int64)
        starts = self.indptr[rows]
        counts = self.indptr[rows + 1] - starts
        indptr = np.zeros(rows.size + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        total = int(indptr[-1])
        if total == 0:
            return CSRMatrix(indptr, np.empty(0, np.int64), np.empty(0, np.float64), self.n_cols)
        flat = np.arange(total, dtype=np.int64) - np.repeat(indptr[:-1], counts) + np.repeat(starts, counts)
        return CSRMatrix(indptr, self.indices[flat], self.data[flat], self.n_cols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        for i in range(self.n_rows):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            out[i, self.indices[lo:hi]] = self.data[lo:hi]
        return out

    @staticmethod
    def from_rows(rows: list[SparseVector], n_cols: int) -> "CSRMatrix":
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        np.cumsum([r.nnz for r in rows], out=indptr[1:])
        if len(rows):
            indices = np.concatenate([r.indices for r in rows])
            data = np.concatenate([r.values for r in rows])
        else:
            indices = np.empty(0, np.int64)
            data = np.empty(0, np.float64)
        return CSRMatrix(indptr, indices, data, n_cols)

    @staticmethod
    def vstack(blocks: list["CSRMatrix"]) -> "CSRMatrix":
        if not blocks:
            raise ValueError("nothing to stack")
        n_cols = blocks[0].n_cols
        if any(b.n_cols != n_cols for b in blocks):
            raise ValueError("column count mismatch")
        indptr = [np.zeros(1, dtype=np.int64)]
        offset = 0
        for b in blocks:
            indptr.append(b.indptr[1:] + offset)
            offset += b.nnz
        return CSRMatrix(
            np.concatenate(indptr),
            np.concatenate([b.indices for b in blocks]),
            np.concatenate([b.data for b in blocks]),
            n_cols,
        )
