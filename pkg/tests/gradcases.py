"""Random gradient-check cases for every differentiable op and the composed losses.

Each case builder takes a ``numpy.random.Generator`` and returns
``(leaves, build)``: ``leaves`` is a list of float arrays and ``build`` maps
the matching parameter tensors to an output tensor. Non-scalar outputs are
reduced against a fixed random weight matrix. Inputs are drawn away from kinks
(relu at 0, ties in sorted samples, the Frobenius singular point).
"""

import numpy as np

from biasdisen import autodiff as ad
from biasdisen.model import forward_full, init_params, prepare_inputs
from biasdisen.objectives import LossWeights, bco_loss, fh_loss, total_loss
from biasdisen.sparse import SparseMatrix
from biasdisen.synthetic import biased_sbm

from conftest import central_difference, rel_err


def _spread(rng, size, gap=1e-3, scale=1.0):
    """Samples whose pairwise gaps all exceed ``gap``."""
    while True:
        v = rng.normal(scale=scale, size=size)
        if size < 2 or np.min(np.diff(np.sort(v.ravel()))) > gap:
            return v


def _away_from_zero(rng, shape, eps=0.05):
    v = rng.normal(size=shape)
    return np.where(np.abs(v) < eps, np.sign(v + 1e-300) * eps * 2, v)


def case_spmm(rng):
    dense = (rng.random((6, 5)) < 0.4) * rng.normal(size=(6, 5))
    a = SparseMatrix.from_dense(dense)
    return [rng.normal(size=(5, 3))], lambda h: ad.spmm(a, h)


def case_matmul(rng):
    return [rng.normal(size=(5, 4)), rng.normal(size=(4, 3))], ad.matmul


def case_add_row_bias(rng):
    return [rng.normal(size=(5, 3)), rng.normal(size=(1, 3))], ad.add_row_bias


def case_relu(rng):
    return [_away_from_zero(rng, (5, 4))], ad.relu


def case_add(rng):
    return [rng.normal(size=(4, 3)), rng.normal(size=(4, 3))], ad.add


def case_subtract(rng):
    return [rng.normal(size=(4, 3)), rng.normal(size=(4, 3))], ad.subtract


def case_scale(rng):
    c = rng.normal()
    return [rng.normal(size=(4, 3))], lambda x: ad.scale(x, c)


def case_concat_cols(rng):
    return [rng.normal(size=(4, 2)), rng.normal(size=(4, 3)), rng.normal(size=(4, 1))], ad.concat_cols


def case_select_rows(rng):
    idx = rng.integers(0, 6, size=8)  # repeats exercise accumulation
    return [rng.normal(size=(6, 3))], lambda x: ad.select_rows(x, idx)


def case_total_sum(rng):
    return [rng.normal(size=(4, 3))], ad.total_sum


def case_linear_combination(rng):
    coefs = rng.normal(size=3)
    return [rng.normal(size=(1, 1)) for _ in range(3)], lambda *t: ad.linear_combination(list(t), coefs)


def case_log_softmax_nll(rng):
    y = rng.integers(0, 2, size=6)
    mask = np.sort(rng.choice(6, size=4, replace=False))
    return [rng.normal(scale=2.0, size=(6, 2))], lambda z: ad.log_softmax_nll(z, y, mask)


def case_frobenius_distance(rng):
    a = rng.normal(size=(4, 3))
    b = rng.normal(size=(4, 3))
    while np.linalg.norm(a - b) <= 0.1:
        b = rng.normal(size=(4, 3))
    return [a, b], ad.frobenius_distance


def case_sorted_w1(rng):
    na, nb = rng.integers(1, 9, size=2)
    v = _spread(rng, na + nb)
    return [v[:na, None], v[na:, None]], ad.sorted_w1


def case_mean_column_w1(rng):
    n, p = 9, 3
    h = np.column_stack([_spread(rng, n) for _ in range(p)])
    rows = rng.permutation(n)
    ra, rb = np.sort(rows[:4]), np.sort(rows[4:])
    return [h], lambda t: ad.mean_column_w1(t, ra, rb)


def _block_leaves(rng, n=8, p=3):
    return [np.column_stack([_spread(rng, n) for _ in range(p)]) for _ in range(3)]


def _subgroups(rng, n=8):
    s = np.zeros(n, dtype=np.int8)
    s[rng.choice(n, size=n // 2, replace=False)] = 1
    return s


def case_primary_loss(rng):
    """Primary NLL through the full model, w.r.t. a first-layer weight and x_stru."""
    g = biased_sbm(n=12, d=3, p_in=0.5, p_out=0.2, seed=int(rng.integers(1 << 30)))
    inputs = prepare_inputs(g, 3)
    params = init_params(g.n, g.d, int(rng.integers(1 << 30)))
    mask = np.arange(0, g.n, 2)

    def build(w0, xs):
        params.w_attr[0] = w0
        params.x_stru = xs
        _, logits = forward_full(inputs, params)
        return ad.log_softmax_nll(logits, g.y, mask)

    return [params.w_attr[0].value.copy(), params.x_stru.value.copy()], build


def case_bco_loss(rng):
    return _block_leaves(rng), lambda a, b, c: bco_loss([a, b, c])


def case_fh_loss(rng):
    s = _subgroups(rng)
    return _block_leaves(rng), lambda a, b, c: fh_loss([a, b, c], s)[0]


def case_total_loss(rng):
    n = 8
    s = _subgroups(rng, n)
    y = rng.integers(0, 2, size=n)
    mask = np.arange(n)
    w = LossWeights(alpha=float(rng.uniform(0.1, 3)), beta=float(rng.uniform(0.01, 1)))

    def build(z, a, b, c):
        return total_loss(z, y, mask, [a, b, c], s, w).total

    return [rng.normal(size=(n, 2))] + _block_leaves(rng, n), build


OP_CASES = {
    "spmm": case_spmm,
    "matmul": case_matmul,
    "add_row_bias": case_add_row_bias,
    "relu": case_relu,
    "add": case_add,
    "subtract": case_subtract,
    "scale": case_scale,
    "concat_cols": case_concat_cols,
    "select_rows": case_select_rows,
    "total_sum": case_total_sum,
    "linear_combination": case_linear_combination,
    "log_softmax_nll": case_log_softmax_nll,
    "frobenius_distance": case_frobenius_distance,
    "sorted_w1": case_sorted_w1,
    "mean_column_w1": case_mean_column_w1,
}

LOSS_CASES = {
    "primary_loss": case_primary_loss,
    "bco_loss": case_bco_loss,
    "fh_loss": case_fh_loss,
    "total_loss": case_total_loss,
}


def gradient_error(case, seed):
    """Relative error between tape and central-difference gradients for one case.

    The error is taken over the full gradient (all leaves concatenated) so a
    leaf whose exact gradient is zero does not divide roundoff by a tiny norm.
    """
    rng = np.random.default_rng(seed)
    leaves, build = case(rng)
    tensors = [ad.parameter(v.copy()) for v in leaves]
    out = build(*tensors)
    weight = np.random.default_rng([seed, 1]).normal(size=out.shape) if out.value.size > 1 else np.ones(out.shape)
    out.backward(weight)

    tape, numeric = [], []
    for t in tensors:
        arr = t.value

        def f():
            fresh = [ad.constant(u.value) if u is not t else ad.constant(arr) for u in tensors]
            return float(np.sum(build(*fresh).value * weight))

        numeric.append(central_difference(f, arr).ravel())
        tape.append((t.grad if t.grad is not None else np.zeros_like(arr)).ravel())
    return rel_err(np.concatenate(tape), np.concatenate(numeric))
