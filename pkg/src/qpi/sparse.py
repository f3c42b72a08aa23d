"""Minimal CSR matrix used for the policy-conditioned transition systems.

Keeps only what the solvers need: construction from triplets or dense,
matvec, dense export.  Stored entries are guaranteed non-zero (anything
below 1e-15 in magnitude is dropped) and column indices are strictly
increasing within each row.
"""

from dataclasses import dataclass

import numpy as np

ZERO_TOL = 1e-15


@dataclass(frozen=True)
class SparseMatrix:
    shape: tuple
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    def __post_init__(self):
        rows, _ = self.shape
        if len(self.indptr) != rows + 1:
            raise ValueError("indptr length must be rows + 1")
        if np.any(np.abs(self.data) < ZERO_TOL):
            raise ValueError("stored explicit zero below tolerance")
        for i in range(rows):
            cols = self.indices[self.indptr[i]:self.indptr[i + 1]]
            if len(cols) > 1 and np.any(np.diff(cols) <= 0):
                raise ValueError(f"row {i}: column indices not strictly increasing")

    @property
    def nnz(self):
        return int(len(self.data))

    @classmethod
    def from_triplets(cls, shape, rows, cols, values):
        """Build from coordinate triplets, summing duplicates."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        acc = {}
        for r, c, v in zip(rows, cols, values):
            acc[(int(r), int(c))] = acc.get((int(r), int(c)), 0.0) + v
        entries = sorted((rc, v) for rc, v in acc.items() if abs(v) >= ZERO_TOL)
        indptr = np.zeros(shape[0] + 1, dtype=np.int64)
        idx = np.empty(len(entries), dtype=np.int64)
        dat = np.empty(len(entries), dtype=float)
        for k, ((r, c), v) in enumerate(entries):
            indptr[r + 1] += 1
            idx[k] = c
            dat[k] = v
        return cls(shape, np.cumsum(indptr), idx, dat)

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=float)
        rows, cols = np.nonzero(np.abs(dense) >= ZERO_TOL)
        return cls.from_triplets(dense.shape, rows, cols, dense[rows, cols])

    def to_dense(self):
        out = np.zeros(self.shape)
        for i in range(self.shape[0]):
            sl = slice(self.indptr[i], self.indptr[i + 1])
            out[i, self.indices[sl]] = self.data[sl]
        return out

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.shape[1],):
            raise ValueError("dimension mismatch")
        row_ids = np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))
        return np.bincount(row_ids, weights=self.data * x[self.indices],
                           minlength=self.shape[0])

    def row(self, i):
        sl = slice(self.indptr[i], self.indptr[i + 1])
        return self.indices[sl], self.data[sl]

    def row_sums(self):
        return self.matvec(np.ones(self.shape[1]))

    def to_coo_rows(self):
        """(row, col, value) triplets in row-major order, for CSV export."""
        for i in range(self.shape[0]):
            cols, vals = self.row(i)
            for c, v in zip(cols, vals):
                yield i, int(c), float(v)
