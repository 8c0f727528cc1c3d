"""Attributed graph data model and the structural operators built on it."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ValidationError
from .sparse import SparseMatrix


@dataclass(frozen=True, eq=False)
class AttributedGraph:
    """Undirected attributed graph with a binary sensitive attribute.

    ``y`` holds 0/1 labels; entries where ``label_mask`` is False are unlabeled
    and their ``y`` value is meaningless (stored as 0). The sensitive attribute
    is never a column of ``x``.
    """

    adjacency: SparseMatrix
    x: np.ndarray
    s: np.ndarray
    y: np.ndarray
    label_mask: np.ndarray
    feature_names: tuple = ()
    name: str = ""

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        if x.ndim != 2:
            raise ValidationError("x must be a 2-D matrix")
        n = x.shape[0]
        s = np.asarray(self.s)
        y = np.asarray(self.y)
        mask = np.asarray(self.label_mask, dtype=bool)
        if s.shape != (n,) or y.shape != (n,) or mask.shape != (n,):
            raise ValidationError("s, y and label_mask must have one entry per node")
        if self.adjacency.shape != (n, n):
            raise ValidationError(f"adjacency shape {self.adjacency.shape} does not match {n} nodes")
        if not np.all(np.isfinite(x)):
            raise ValidationError("attribute matrix contains NaN or infinity")
        if not np.all((s == 0) | (s == 1)):
            raise ValidationError("sensitive attribute must be binary 0/1")
        if s.min(initial=1) == s.max(initial=0):
            raise ValidationError("both sensitive subgroups must be nonempty")
        y = np.where(mask, y, 0)
        if not np.all((y == 0) | (y == 1)):
            raise ValidationError("labels must be binary 0/1")
        if not self.adjacency.is_symmetric():
            raise ValidationError("adjacency must be symmetric")
        if np.any(self.adjacency.diagonal() != 0):
            raise ValidationError("adjacency must not contain self-loops")
        s = s.astype(np.int8)
        y = y.astype(np.int8)
        for arr in (x, s, y, mask):
            arr.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "label_mask", mask)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def d(self):
        return self.x.shape[1]

    @property
    def m(self):
        """Undirected edge count (each edge once)."""
        return self.adjacency.nnz // 2

    @property
    def nnz(self):
        """Stored adjacency entries, i.e. both directions of every edge."""
        return self.adjacency.nnz

    def edge_counts(self):
        return {"undirected": self.m, "directed_entries": self.nnz}

    def edges(self):
        """Upper-triangle edge list as an (m, 2) array sorted by (src, dst)."""
        rows = self.adjacency.row_ids()
        cols = self.adjacency.indices
        keep = rows < cols
        return np.stack([rows[keep], cols[keep]], axis=1)

    def labeled_nodes(self):
        return np.flatnonzero(self.label_mask)

    def same_as(self, other):
        return (
            self.adjacency == other.adjacency
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.s, other.s)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.label_mask, other.label_mask)
            and self.feature_names == other.feature_names
        )


@dataclass(frozen=True)
class SplitMasks:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray

    def sizes(self):
        return (len(self.train), len(self.val), len(self.test))


def minmax_scale(x):
    """Scale each column into [0, 1]; constant columns become 0."""
    x = np.asarray(x, dtype=np.float64)
    lo = x.min(axis=0)
    span = x.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    out = (x - lo) / safe
    out[:, span == 0] = 0.0
    return out


def symmetrize(a):
    """Binary union of ``a`` and its transpose."""
    rows = np.concatenate([a.row_ids(), a.indices])
    cols = np.concatenate([a.indices, a.row_ids()])
    return SparseMatrix.from_coo(rows, cols, 1.0, a.shape, sum_duplicates=False)


def edges_to_adjacency(src, dst, n):
    """Symmetric binary adjacency from an undirected edge list; drops self-loops and duplicates."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    keep = src != dst
    src, dst = src[keep], dst[keep]
    rows = np.concatenate([src, dst])
    cols = np.concatenate([dst, src])
    return SparseMatrix.from_coo(rows, cols, 1.0, (n, n), sum_duplicates=False)


def normalize_adjacency(a, add_self_loops=True):
    """Symmetric degree normalisation ``D^-1/2 (A [+ I]) D^-1/2``.

    Isolated nodes (no stored entries) end up with a lone 1 on the diagonal in
    either mode.
    """
    if a.n_rows != a.n_cols:
        raise ValidationError("adjacency must be square")
    n = a.n_rows
    rows, cols, vals = a.row_ids(), a.indices, a.data
    isolated = np.diff(a.indptr) == 0
    if add_self_loops:
        loops = np.arange(n)
    else:
        loops = np.flatnonzero(isolated)
    rows = np.concatenate([rows, loops])
    cols = np.concatenate([cols, loops])
    vals = np.concatenate([vals, np.ones(loops.size)])
    m = SparseMatrix.from_coo(rows, cols, vals, (n, n))
    deg = m.row_sums()
    dinv = np.zeros(n)
    pos = deg > 0
    dinv[pos] = 1.0 / np.sqrt(deg[pos])
    r = m.row_ids()
    return m.with_values(dinv[r] * m.data * dinv[m.indices])


def build_knn_graph(x, k, symmetric=True):
    """k-NN graph over attribute rows by Euclidean distance.

    Each row first gets exactly ``k`` out-neighbours (itself excluded, ties to
    the lower node index). With ``symmetric`` the directed relation is unioned
    with its transpose.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError("x must be a 2-D matrix")
    n = x.shape[0]
    k = int(k)
    if k < 1 or k >= n:
        raise ValidationError(f"k must satisfy 1 <= k < n (got k={k}, n={n})")
    if not np.all(np.isfinite(x)):
        raise ValidationError("attribute matrix contains NaN or infinity")
    nbrs = kernels.knn(x, k)
    indptr = np.arange(0, n * k + 1, k, dtype=np.int64)
    directed = SparseMatrix(n, n, indptr, nbrs.ravel(), np.ones(n * k))
    return symmetrize(directed) if symmetric else directed


def split_nodes(graph, seed, fractions=(0.50, 0.25, 0.25)):
    """Random train/val/test split over labeled nodes; rounding remainder goes to train."""
    labeled = graph.labeled_nodes()
    n_lab = labeled.size
    if n_lab < 4:
        raise ValidationError(f"need at least 4 labeled nodes to split, got {n_lab}")
    rng = np.random.default_rng(seed)
    perm = labeled[rng.permutation(n_lab)]
    n_val = int(np.floor(fractions[1] * n_lab))
    n_test = int(np.floor(fractions[2] * n_lab))
    n_train = n_lab - n_val - n_test
    return SplitMasks(
        train=np.sort(perm[:n_train]),
        val=np.sort(perm[n_train : n_train + n_val]),
        test=np.sort(perm[n_train + n_val :]),
    )
