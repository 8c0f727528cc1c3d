"""Minimal reverse-mode differentiation over dense float64 matrices.

Only the operator set the model needs is provided. Every forward op checks
that its value is finite and raises :class:`NumericError` otherwise.
Scalars are 1x1 tensors.
"""

import numpy as np

from . import kernels
from .errors import NumericError, UndefinedMetricError, ValidationError


class Tensor:
    __slots__ = ("value", "grad", "requires_grad", "parents", "backward_fn", "op", "name")

    def __init__(self, value, requires_grad=False, name=None, parents=(), backward_fn=None, op="leaf"):
        value = np.asarray(value, dtype=np.float64)
        if value.ndim == 0:
            value = value.reshape(1, 1)
        elif value.ndim == 1:
            value = value.reshape(-1, 1)
        if value.ndim != 2:
            raise ValidationError(f"tensors are 2-D, got shape {value.shape}")
        self.value = value
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.parents = parents
        self.backward_fn = backward_fn
        self.op = op
        self.name = name

    @property
    def shape(self):
        return self.value.shape

    def item(self):
        if self.value.size != 1:
            raise ValidationError(f"item() needs a single-element tensor, shape is {self.shape}")
        return float(self.value[0, 0])

    def zero_grad(self):
        self.grad = None

    def backward(self, grad=None):
        """Accumulate d(self)/d(leaf) into every reachable leaf's ``grad``."""
        if grad is None:
            if self.value.size != 1:
                raise ValidationError("backward() without a seed gradient needs a scalar output")
            grad = np.ones_like(self.value)
        order = _topological_order(self)
        pending = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in order:
            g = pending.pop(id(node), None)
            if g is None:
                continue
            if node.backward_fn is None:
                node.grad = g if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node.parents, node.backward_fn(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                pending[key] = pg if key not in pending else pending[key] + pg

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, op={self.op})"


def _topological_order(root):
    """Nodes reachable from ``root`` with every node before its parents; each visited once."""
    seen = set()
    post = []
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            post.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    post.reverse()
    return post


def parameter(value, name=None):
    return Tensor(np.array(value, dtype=np.float64), requires_grad=True, name=name)


def constant(value):
    return Tensor(value)


def _make(value, parents, backward_fn, op):
    if not np.all(np.isfinite(value)):
        raise NumericError(f"non-finite value produced by {op}")
    needs = any(p.requires_grad for p in parents)
    return Tensor(value, requires_grad=needs, parents=parents if needs else (),
                  backward_fn=backward_fn if needs else None, op=op)


def _check_same(a, b, op):
    if a.shape != b.shape:
        raise ValidationError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


# ---------------------------------------------------------------------------
# linear algebra


def spmm(a, h):
    """Constant sparse matrix times tensor; ``a`` itself is never differentiated."""
    if a.n_cols != h.shape[0]:
        raise ValidationError(f"spmm: shape mismatch {a.shape} @ {h.shape}")
    out = a.matmul(h.value)
    return _make(out, (h,), lambda g: (a.transpose().matmul(g),), "spmm")


def matmul(x, w):
    if x.shape[1] != w.shape[0]:
        raise ValidationError(f"matmul: shape mismatch {x.shape} @ {w.shape}")
    return _make(x.value @ w.value, (x, w), lambda g: (g @ w.value.T, x.value.T @ g), "matmul")


def add_row_bias(x, b):
    if b.shape != (1, x.shape[1]):
        raise ValidationError(f"add_row_bias: bias must be 1x{x.shape[1]}, got {b.shape}")
    return _make(x.value + b.value, (x, b), lambda g: (g, g.sum(axis=0, keepdims=True)), "add_row_bias")


def relu(x):
    on = x.value > 0
    return _make(np.where(on, x.value, 0.0), (x,), lambda g: (g * on,), "relu")


def add(a, b):
    _check_same(a, b, "add")
    return _make(a.value + b.value, (a, b), lambda g: (g, g), "add")


def subtract(a, b):
    _check_same(a, b, "subtract")
    return _make(a.value - b.value, (a, b), lambda g: (g, -g), "subtract")


def scale(x, c):
    c = float(c)
    return _make(c * x.value, (x,), lambda g: (c * g,), "scale")


def concat_cols(*parts):
    if not parts:
        raise ValidationError("concat_cols needs at least one tensor")
    n = parts[0].shape[0]
    if any(p.shape[0] != n for p in parts):
        raise ValidationError("concat_cols: row counts differ")
    bounds = np.cumsum([0] + [p.shape[1] for p in parts])

    def back(g):
        return tuple(g[:, bounds[i] : bounds[i + 1]] for i in range(len(parts)))

    return _make(np.concatenate([p.value for p in parts], axis=1), tuple(parts), back, "concat_cols")


def select_rows(x, idx):
    idx = np.asarray(idx, dtype=np.int64)
    n = x.shape[0]

    def back(g):
        out = np.zeros_like(x.value)
        np.add.at(out, idx, g)
        return (out,)

    if idx.size and (idx.min() < -n or idx.max() >= n):
        raise ValidationError("select_rows: index out of range")
    return _make(x.value[idx], (x,), back, "select_rows")


def total_sum(x):
    return _make(x.value.sum(), (x,), lambda g: (np.full_like(x.value, g[0, 0]),), "sum")


def linear_combination(terms, coefs):
    """``sum_i coefs[i] * terms[i]`` evaluated left to right as scalars."""
    if len(terms) != len(coefs) or not terms:
        raise ValidationError("linear_combination needs matching nonempty terms and coefs")
    coefs = [float(c) for c in coefs]
    value = terms[0].value[0, 0] if coefs[0] == 1.0 else coefs[0] * terms[0].value[0, 0]
    for t, c in zip(terms[1:], coefs[1:]):
        value = value + c * t.value[0, 0]
    return _make(np.array([[value]]), tuple(terms), lambda g: tuple(c * g for c in coefs), "linear_combination")


# ---------------------------------------------------------------------------
# losses and distances


def log_softmax_nll(logits, y, mask):
    """Mean negative log-likelihood of ``y`` over the rows in ``mask``."""
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise UndefinedMetricError("log_softmax_nll: empty mask")
    y = np.asarray(y)[mask].astype(np.int64)
    z = logits.value[mask]
    z = z - z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logp = z - logsum
    rows = np.arange(mask.size)
    loss = -logp[rows, y].mean()

    def back(g):
        probs = np.exp(logp)
        probs[rows, y] -= 1.0
        out = np.zeros_like(logits.value)
        np.add.at(out, mask, probs * (g[0, 0] / mask.size))
        return (out,)

    return _make(np.array([[loss]]), (logits,), back, "log_softmax_nll")


def frobenius_distance(a, b, clamp=None):
    """``||a - b||_F``; the gradient at ``a == b`` is defined as zero.

    With ``clamp`` the distance is ``min(||a - b||, clamp)`` and carries no
    gradient past the clamp.
    """
    _check_same(a, b, "frobenius_distance")
    diff = a.value - b.value
    norm = float(np.sqrt(np.sum(diff * diff)))
    capped = clamp is not None and norm >= clamp
    value = float(clamp) if capped else norm

    def back(g):
        if norm == 0.0 or capped:
            z = np.zeros_like(diff)
            return (z, z)
        ga = diff * (g[0, 0] / norm)
        return (ga, -ga)

    return _make(np.array([[value]]), (a, b), back, "frobenius_distance")


def sorted_w1(a, b):
    """Exact 1-D Wasserstein-1 between the empirical samples in two column tensors.

    The sort permutation is held constant in the backward pass, which gives the
    exact gradient wherever no two samples tie.
    """
    if a.shape[1] != 1 or b.shape[1] != 1:
        raise ValidationError("sorted_w1 expects column tensors")
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise UndefinedMetricError("sorted_w1: empty sample")
    value, ga, gb = kernels.w1(a.value[:, 0], b.value[:, 0])
    return _make(np.array([[value]]), (a, b),
                 lambda g: (ga[:, None] * g[0, 0], gb[:, None] * g[0, 0]), "sorted_w1")


def mean_column_w1(h, rows_a, rows_b):
    """Average over columns of ``sorted_w1`` between two row subsets of ``h``."""
    rows_a = np.asarray(rows_a, dtype=np.int64)
    rows_b = np.asarray(rows_b, dtype=np.int64)
    if rows_a.size == 0 or rows_b.size == 0:
        raise UndefinedMetricError("mean_column_w1: empty subgroup")
    p = h.shape[1]
    values, ga, gb = kernels.w1_columns(h.value[rows_a], h.value[rows_b])

    def back(g):
        out = np.zeros_like(h.value)
        c = g[0, 0] / p
        np.add.at(out, rows_a, ga * c)
        np.add.at(out, rows_b, gb * c)
        return (out,)

    return _make(np.array([[values.sum() / p]]), (h,), back, "mean_column_w1")
