"""Dataset-level bias analysis and prediction-level accuracy/fairness metrics."""

from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .errors import UndefinedMetricError, ValidationError
from .graph import minmax_scale, normalize_adjacency


@dataclass(frozen=True)
class DatasetFairnessReport:
    attr_bias: float
    stru_bias: float
    homo_ratio: float
    nbhd_fair: float
    alpha_prop: float
    hops: int
    gamma: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class PredictionReport:
    acc: float
    auc: float
    f1: float
    sp: float
    eo: float

    def to_dict(self):
        return asdict(self)


def wasserstein1_empirical(a, b):
    """Exact W1 between two 1-D empirical samples (merged-CDF integration)."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise UndefinedMetricError("wasserstein1_empirical needs two nonempty samples")
    return float(kernels.w1(a, b)[0])


def _groups(s):
    s = np.asarray(s).ravel()
    g0 = np.flatnonzero(s == 0)
    g1 = np.flatnonzero(s == 1)
    if g0.size == 0 or g1.size == 0:
        raise UndefinedMetricError("both sensitive subgroups must be nonempty")
    return g0, g1


def _mean_column_w1(mat, s):
    g0, g1 = _groups(s)
    values = kernels.w1_columns(mat[g0], mat[g1])[0]
    return float(values.mean())


def attr_bias(x, s):
    """Mean over attribute columns of the subgroup W1 distance."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ValidationError("attr_bias needs a 2-D attribute matrix with at least one column")
    return _mean_column_w1(x, s)


def propagation_weights(hops, gamma):
    """Normalised geometric discount ``gamma^h / sum_j gamma^j`` for h = 1..hops."""
    w = gamma ** np.arange(1, hops + 1, dtype=np.float64)
    return w / w.sum()


def reachability(adjacency, x_norm, alpha_prop=0.5, hops=2, gamma=0.5):
    """``R = sum_h beta_h P^h X`` with ``P = alpha A_norm + (1 - alpha) I``."""
    if not 0 < alpha_prop < 1:
        raise ValidationError(f"alpha_prop must lie in (0, 1), got {alpha_prop}")
    if int(hops) < 1:
        raise ValidationError(f"hops must be at least 1, got {hops}")
    if not gamma > 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    a_norm = normalize_adjacency(adjacency, add_self_loops=False)
    betas = propagation_weights(int(hops), gamma)
    cur = np.asarray(x_norm, dtype=np.float64)
    out = np.zeros_like(cur)
    for beta in betas:
        cur = alpha_prop * a_norm.matmul(cur) + (1.0 - alpha_prop) * cur
        out += beta * cur
    return out


def stru_bias(graph, alpha_prop=0.5, hops=2, gamma=0.5):
    """Mean per-dimension subgroup W1 of the reachability-propagated attributes."""
    r = reachability(graph.adjacency, minmax_scale(graph.x), alpha_prop, hops, gamma)
    return _mean_column_w1(r, graph.s)


def homophily_ratio(adjacency, s):
    """Fraction of edges whose endpoints share the sensitive value."""
    s = np.asarray(s).ravel()
    rows = adjacency.row_ids()
    cols = adjacency.indices
    off = rows != cols
    if not np.any(off):
        raise UndefinedMetricError("homophily_ratio is undefined on an edgeless graph")
    # Each undirected edge is stored twice, which leaves the ratio unchanged.
    same = s[rows[off]] == s[cols[off]]
    return float(same.sum() / same.size)


def neighborhood_fairness(adjacency, s):
    """Mean natural-log entropy of each node's neighbour subgroup mix (isolated nodes give 0)."""
    s = np.asarray(s).ravel()
    rows = adjacency.row_ids()
    n = adjacency.n_rows
    deg = np.bincount(rows, minlength=n).astype(np.float64)
    ones = np.bincount(rows, weights=(s[adjacency.indices] == 1).astype(np.float64), minlength=n)
    has = deg > 0
    ent = np.zeros(n)
    p1 = ones[has] / deg[has]
    p0 = 1.0 - p1
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p0 > 0, p0 * np.log(p0), 0.0) + np.where(p1 > 0, p1 * np.log(p1), 0.0)
    ent[has] = -terms
    return float(ent.mean())


def analyze(graph, alpha_prop=0.5, hops=2, gamma=0.5):
    return DatasetFairnessReport(
        attr_bias=attr_bias(graph.x, graph.s),
        stru_bias=stru_bias(graph, alpha_prop, hops, gamma),
        homo_ratio=homophily_ratio(graph.adjacency, graph.s),
        nbhd_fair=neighborhood_fairness(graph.adjacency, graph.s),
        alpha_prop=float(alpha_prop),
        hops=int(hops),
        gamma=float(gamma),
    )


# ---------------------------------------------------------------------------
# prediction metrics


def statistical_parity(y_hat, s):
    y_hat = np.asarray(y_hat).ravel()
    g0, g1 = _groups(s)
    return float(abs(y_hat[g0].mean() - y_hat[g1].mean()))


def equal_opportunity(y_hat, y, s):
    y_hat = np.asarray(y_hat).ravel()
    y = np.asarray(y).ravel()
    s = np.asarray(s).ravel()
    pos0 = (s == 0) & (y == 1)
    pos1 = (s == 1) & (y == 1)
    if not pos0.any() or not pos1.any():
        raise UndefinedMetricError("equal_opportunity needs a positive example in each subgroup")
    return float(abs(y_hat[pos0].mean() - y_hat[pos1].mean()))


def _average_ranks(x):
    order = np.argsort(x, kind="stable")
    xs = x[order]
    new_group = np.concatenate(([True], xs[1:] != xs[:-1]))
    group = np.cumsum(new_group) - 1
    starts = np.flatnonzero(new_group)
    ends = np.append(starts[1:], x.size)
    ranks = np.empty(x.size)
    ranks[order] = (0.5 * (starts + ends + 1))[group]
    return ranks


def roc_auc(scores, y):
    """Mann-Whitney AUC; tied pairs count one half."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(y).ravel()
    n1 = int((y == 1).sum())
    n0 = int((y == 0).sum())
    if n1 == 0 or n0 == 0:
        raise UndefinedMetricError("AUC needs both classes present")
    ranks = _average_ranks(scores)
    return float((ranks[y == 1].sum() - n1 * (n1 + 1) / 2.0) / (n1 * n0))


def predict_labels(scores, threshold=0.5):
    return (np.asarray(scores, dtype=np.float64) > threshold).astype(np.int64)


def accuracy_auc_f1(scores, y):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(y).ravel().astype(np.int64)
    if scores.size == 0 or scores.size != y.size:
        raise ValidationError("scores and labels must be nonempty and aligned")
    y_hat = predict_labels(scores)
    acc = float((y_hat == y).mean())
    tp = int(((y_hat == 1) & (y == 1)).sum())
    fp = int(((y_hat == 1) & (y == 0)).sum())
    fn = int(((y_hat == 0) & (y == 1)).sum())
    denom = 2 * tp + fp + fn
    f1 = 2 * tp / denom if denom else 0.0
    return acc, roc_auc(scores, y), float(f1)


def prediction_report(scores, y, s):
    acc, auc, f1 = accuracy_auc_f1(scores, y)
    y_hat = predict_labels(scores)
    return PredictionReport(acc, auc, f1, statistical_parity(y_hat, s), equal_opportunity(y_hat, y, s))
