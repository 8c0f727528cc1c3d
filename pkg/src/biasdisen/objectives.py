"""Training objective: primary NLL, bias-contrast separation and subgroup W1 alignment."""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import autodiff as ad
from .errors import UndefinedMetricError, ValidationError


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValidationError(f"loss weight {name} must be finite and non-negative, got {v}")


@dataclass
class LossBreakdown:
    l_primary: float
    l_fh: float
    l_bco: float
    l_total: float
    fh_components: dict = field(default_factory=dict)
    total: ad.Tensor = None

    def to_dict(self):
        return {"l_primary": self.l_primary, "l_fh": self.l_fh, "l_bco": self.l_bco, "l_total": self.l_total}


def _as_blocks(embeddings):
    if hasattr(embeddings, "blocks"):
        return embeddings.blocks()
    if isinstance(embeddings, dict):
        return list(embeddings.items())
    return [(str(i), t) for i, t in enumerate(embeddings)]


def bco_loss(embeddings, clamp=None):
    """``-sum_{q != r} ||H_q - H_r||_F`` over ordered pairs, so each unordered pair counts twice."""
    blocks = [t for _, t in _as_blocks(embeddings)]
    pairs = list(combinations(blocks, 2))
    if not pairs:
        return ad.constant(0.0)
    dists = [ad.frobenius_distance(a, b, clamp=clamp) for a, b in pairs]
    return ad.linear_combination(dists, [-2.0] * len(dists))


def subgroup_rows(s):
    s = np.asarray(s).ravel()
    g0, g1 = np.flatnonzero(s == 0), np.flatnonzero(s == 1)
    if g0.size == 0 or g1.size == 0:
        raise UndefinedMetricError("fh_loss needs both sensitive subgroups")
    return g0, g1


def fh_loss(embeddings, s):
    """Sum over bias blocks of the per-dimension mean subgroup W1.

    Returns ``(loss, components)`` where ``components`` maps block tag to its
    float contribution.
    """
    g0, g1 = subgroup_rows(s)
    blocks = _as_blocks(embeddings)
    if not blocks:
        return ad.constant(0.0), {}
    terms = [ad.mean_column_w1(t, g0, g1) for _, t in blocks]
    comps = {tag: term.item() for (tag, _), term in zip(blocks, terms)}
    loss = ad.linear_combination(terms, [1.0] * len(terms)) if len(terms) > 1 else terms[0]
    return loss, comps


def total_loss(logits, y, mask, embeddings, s, weights, bco_clamp=None):
    """``L = L_primary + alpha * L_fh + beta * L_bco`` on one tape.

    Terms with a zero weight stay out of the tape (their values are still
    reported), which leaves the breakdown identity exact.
    """
    l_primary = ad.log_softmax_nll(logits, y, mask)
    l_fh, comps = fh_loss(embeddings, s)
    l_bco = bco_loss(embeddings, clamp=bco_clamp)
    terms, coefs = [l_primary], [1.0]
    if weights.alpha != 0:
        terms.append(l_fh)
        coefs.append(weights.alpha)
    if weights.beta != 0:
        terms.append(l_bco)
        coefs.append(weights.beta)
    total = ad.linear_combination(terms, coefs)
    return LossBreakdown(
        l_primary=l_primary.item(),
        l_fh=l_fh.item(),
        l_bco=l_bco.item(),
        l_total=total.item(),
        fh_components=comps,
        total=total,
    )
