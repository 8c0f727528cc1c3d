"""Row-compressed sparse matrix used for adjacency and propagation operators."""

import numpy as np

from . import kernels
from .errors import ValidationError


class SparseMatrix:
    """Immutable CSR matrix with 64-bit float values.

    Column indices inside each row are strictly increasing. Build instances with
    :meth:`from_coo` unless the arrays are already canonical.
    """

    __slots__ = ("n_rows", "n_cols", "indptr", "indices", "data", "_transpose")

    def __init__(self, n_rows, n_cols, indptr, indices, data, check=True):
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self._transpose = None
        for arr in (self.indptr, self.indices, self.data):
            arr.flags.writeable = False
        if check:
            self._validate()

    def _validate(self):
        if self.indptr.shape != (self.n_rows + 1,) or self.indptr[0] != 0:
            raise ValidationError("indptr must have n_rows + 1 entries starting at 0")
        if np.any(np.diff(self.indptr) < 0):
            raise ValidationError("indptr must be monotone")
        nnz = int(self.indptr[-1])
        if self.indices.shape != (nnz,) or self.data.shape != (nnz,):
            raise ValidationError("indices/data length must equal indptr[-1]")
        if nnz:
            if self.indices.min() < 0 or self.indices.max() >= self.n_cols:
                raise ValidationError("column index out of range")
            rows = self.row_ids()
            same_row = rows[1:] == rows[:-1]
            if np.any(same_row & (np.diff(self.indices) <= 0)):
                raise ValidationError("column indices must be strictly increasing within each row")
        if not np.all(np.isfinite(self.data)):
            raise ValidationError("sparse values must be finite")

    @classmethod
    def from_coo(cls, rows, cols, values, shape, sum_duplicates=True):
        """Build from triplets. Duplicates are summed, or collapsed to the last value."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.broadcast_to(np.asarray(values, dtype=np.float64), rows.shape)
        n_rows, n_cols = shape
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols):
            raise ValidationError("coordinate out of range")
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if rows.size:
            key_change = np.ones(rows.size, dtype=bool)
            key_change[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(key_change)
            if sum_duplicates:
                values = np.add.reduceat(values, starts)
            else:
                ends = np.append(starts[1:], rows.size) - 1
                values = values[ends]
            rows, cols = rows[starts], cols[starts]
        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
        return cls(n_rows, n_cols, indptr, cols, values, check=False)

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=np.float64)
        r, c = np.nonzero(dense)
        return cls.from_coo(r, c, dense[r, c], dense.shape)

    @classmethod
    def identity(cls, n):
        idx = np.arange(n)
        return cls(n, n, np.arange(n + 1), idx, np.ones(n), check=False)

    @property
    def shape(self):
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self):
        return int(self.indptr[-1])

    def row_ids(self):
        """Row index of every stored entry."""
        return np.repeat(np.arange(self.n_rows, dtype=np.int64), np.diff(self.indptr))

    def row_sums(self):
        out = np.zeros(self.n_rows)
        np.add.at(out, self.row_ids(), self.data)
        return out

    def diagonal(self):
        rows = self.row_ids()
        out = np.zeros(min(self.shape))
        on_diag = rows == self.indices
        out[rows[on_diag]] = self.data[on_diag]
        return out

    def to_dense(self):
        out = np.zeros(self.shape)
        out[self.row_ids(), self.indices] = self.data
        return out

    def transpose(self):
        if self._transpose is None:
            t = SparseMatrix.from_coo(self.indices, self.row_ids(), self.data, (self.n_cols, self.n_rows))
            t._transpose = self
            self._transpose = t
        return self._transpose

    T = property(transpose)

    def is_symmetric(self):
        if self.n_rows != self.n_cols:
            return False
        t = self.transpose()
        return (
            np.array_equal(self.indptr, t.indptr)
            and np.array_equal(self.indices, t.indices)
            and np.array_equal(self.data, t.data)
        )

    def with_values(self, data):
        return SparseMatrix(self.n_rows, self.n_cols, self.indptr, self.indices, data, check=False)

    def matmul(self, h):
        """Dense product ``self @ h`` through the active kernel backend."""
        h = np.asarray(h, dtype=np.float64)
        squeeze = h.ndim == 1
        if squeeze:
            h = h[:, None]
        if h.shape[0] != self.n_cols:
            raise ValidationError(f"shape mismatch: {self.shape} @ {h.shape}")
        out = kernels.spmm(self.indptr, self.indices, self.data, h)
        return out[:, 0] if squeeze else out

    __matmul__ = matmul

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.data, other.data)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"
