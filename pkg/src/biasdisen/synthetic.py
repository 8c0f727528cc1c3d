"""Small synthetic graphs with controllable attribute and structural bias."""

import numpy as np

from .graph import AttributedGraph, edges_to_adjacency, minmax_scale


def biased_sbm(n=200, d=8, p_in=0.08, p_out=0.01, attr_shift=1.0, label_noise=0.1,
               label_rate=1.0, seed=0, name="synthetic"):
    """Two-block stochastic block model whose blocks are the sensitive subgroups.

    ``p_in``/``p_out`` set the structural bias (homophily in ``s``). The first
    half of the attribute columns is shifted by ``attr_shift`` for ``s=1``
    (attribute bias). Labels follow a linear rule on the unshifted columns
    plus a fraction of that shift, so a classifier can pick up ``s``.
    """
    if n < 4:
        raise ValueError("biased_sbm needs at least 4 nodes")
    # own stream so the subgroup draw never lines up with split_nodes(seed)
    rng = np.random.default_rng([seed, 0x5B])
    s = np.zeros(n, dtype=np.int8)
    s[rng.permutation(n)[: n // 2]] = 1
    x = rng.normal(size=(n, d))
    n_shift = max(1, d // 2)
    x[:, :n_shift] += attr_shift * s[:, None]

    w = rng.normal(size=d)
    z = x[:, n_shift:] @ w[n_shift:] if d > n_shift else np.zeros(n)
    z = z + 0.5 * attr_shift * (s - 0.5)
    y = (z > np.median(z)).astype(np.int8)
    flip = rng.random(n) < label_noise
    y[flip] = 1 - y[flip]

    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(s[iu] == s[ju], p_in, p_out)
    keep = rng.random(iu.size) < prob
    adjacency = edges_to_adjacency(iu[keep], ju[keep], n)

    mask = rng.random(n) < label_rate
    if mask.sum() < 4:
        mask[:] = True
    return AttributedGraph(
        adjacency=adjacency,
        x=minmax_scale(x),
        s=s,
        y=np.where(mask, y, 0),
        label_mask=mask,
        feature_names=tuple(f"f{j}" for j in range(d)),
        name=name,
    )
