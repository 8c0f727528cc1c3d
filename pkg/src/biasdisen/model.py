"""Bias disentanglers, potential-bias subtraction, classifier head and the vanilla GCN baseline."""

from dataclasses import dataclass, field, fields

import numpy as np

from . import autodiff as ad
from .errors import ValidationError
from .graph import build_knn_graph, normalize_adjacency

EMBED_DIM = 16
N_LAYERS = 3

# Fixed RNG stream ids so shared parameter blocks are identical across variants.
_STREAM_ATTR, _STREAM_STRU, _STREAM_XSTRU, _STREAM_MLP, _STREAM_CLS, _STREAM_GCN = range(1, 7)


@dataclass(frozen=True)
class Ablation:
    """Which disentanglers and regularisers are wired in."""

    tag: str = "none"
    use_attr: bool = True
    use_stru: bool = True
    use_pot: bool = True
    use_fh: bool = True
    use_bco: bool = True

    @property
    def blocks(self):
        return tuple(b for b, on in (("attr", self.use_attr), ("stru", self.use_stru), ("pot", self.use_pot)) if on)


ABLATIONS = {
    "none": Ablation("none"),
    "no_ab": Ablation("no_ab", use_attr=False),
    "no_sb": Ablation("no_sb", use_stru=False),
    "no_pb": Ablation("no_pb", use_pot=False),
    "no_fh": Ablation("no_fh", use_fh=False),
    "no_bco": Ablation("no_bco", use_bco=False),
}


def apply_ablation(variant):
    try:
        return ABLATIONS[variant]
    except KeyError:
        raise ValidationError(f"unknown ablation {variant!r}; choose from {sorted(ABLATIONS)}") from None


@dataclass
class ModelParams:
    w_attr: list = field(default_factory=list)
    b_attr: list = field(default_factory=list)
    w_stru: list = field(default_factory=list)
    b_stru: list = field(default_factory=list)
    x_stru: ad.Tensor = None
    mlp_w: list = field(default_factory=list)
    mlp_b: list = field(default_factory=list)
    w_cls: ad.Tensor = None
    b_cls: ad.Tensor = None

    def groups(self):
        """Optimizer groups: AbDisen, SbDisen (with its learnable inputs), PbDisen plus head."""
        pot = self.mlp_w + self.mlp_b + [self.w_cls, self.b_cls]
        stru = self.w_stru + self.b_stru + ([self.x_stru] if self.x_stru is not None else [])
        return {"attr": self.w_attr + self.b_attr, "stru": stru, "pot": pot}

    def tensors(self):
        g = self.groups()
        return g["attr"] + g["stru"] + g["pot"]

    def snapshot(self):
        return [t.value.copy() for t in self.tensors()]

    def restore(self, values):
        for t, v in zip(self.tensors(), values):
            t.value = v.copy()
            t.grad = None

    def named_arrays(self):
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, list):
                for i, t in enumerate(val):
                    out[f"{f.name}.{i}"] = t.value
            elif val is not None:
                out[f.name] = val.value
        return out


def _uniform(rng, fan_in, fan_out, name):
    bound = 1.0 / np.sqrt(fan_in)
    return ad.parameter(rng.uniform(-bound, bound, size=(fan_in, fan_out)), name=name)


def _zeros(width, name):
    return ad.parameter(np.zeros((1, width)), name=name)


def _stack(seed, stream, dims, prefix):
    rng = np.random.default_rng([seed, stream])
    ws = [_uniform(rng, dims[i], dims[i + 1], f"{prefix}.w{i}") for i in range(len(dims) - 1)]
    bs = [_zeros(dims[i + 1], f"{prefix}.b{i}") for i in range(len(dims) - 1)]
    return ws, bs


def init_params(n, d, seed, ablation="none", p=EMBED_DIM, layers=N_LAYERS):
    """Initialise all blocks; each block draws from its own seeded stream.

    Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0, the learnable
    structure inputs ~ 0.1 * N(0, 1) with shape n x d.
    """
    abl = apply_ablation(ablation) if isinstance(ablation, str) else ablation
    dims = [d] + [p] * layers
    params = ModelParams()
    if abl.use_attr:
        params.w_attr, params.b_attr = _stack(seed, _STREAM_ATTR, dims, "attr")
    if abl.use_stru:
        params.w_stru, params.b_stru = _stack(seed, _STREAM_STRU, dims, "stru")
        rng = np.random.default_rng([seed, _STREAM_XSTRU])
        params.x_stru = ad.parameter(0.1 * rng.standard_normal((n, d)), name="x_stru")
    n_in = p * (int(abl.use_attr) + int(abl.use_stru))
    if abl.use_pot:
        if n_in == 0:
            raise ValidationError("the potential-bias block needs at least one other block")
        params.mlp_w, params.mlp_b = _stack(seed, _STREAM_MLP, [n_in, 2 * p, p], "mlp")
    width = p * len(abl.blocks)
    rng = np.random.default_rng([seed, _STREAM_CLS])
    params.w_cls = _uniform(rng, width, 2, "cls.w")
    params.b_cls = _zeros(2, "cls.b")
    return params


@dataclass(frozen=True)
class ModelInputs:
    x: ad.Tensor
    a_attr_norm: object
    a_stru_norm: object

    @property
    def n(self):
        return self.x.shape[0]


def prepare_inputs(graph, k):
    """Normalised k-NN attribute graph and normalised input graph, both with self-loops."""
    a_attr = build_knn_graph(graph.x, k)
    return ModelInputs(
        x=ad.constant(graph.x),
        a_attr_norm=normalize_adjacency(a_attr, add_self_loops=True),
        a_stru_norm=normalize_adjacency(graph.adjacency, add_self_loops=True),
    )


def gcn_stack(a_norm, h, weights, biases, last_activation=False):
    """``H <- relu(A H W + b)`` per layer; the last layer stays linear unless asked."""
    last = len(weights) - 1
    for i, (w, b) in enumerate(zip(weights, biases)):
        h = ad.add_row_bias(ad.spmm(a_norm, ad.matmul(h, w)), b)
        if i < last or last_activation:
            h = ad.relu(h)
    return h


def ab_disen_forward(a_attr_norm, x, params):
    return gcn_stack(a_attr_norm, x, params.w_attr, params.b_attr)


def sb_disen_forward(a_stru_norm, params):
    return gcn_stack(a_stru_norm, params.x_stru, params.w_stru, params.b_stru)


def pb_disen_forward(h_attr, h_stru, params):
    """Entangled embedding from an MLP over the available blocks, minus those blocks."""
    present = [h for h in (h_attr, h_stru) if h is not None]
    if not present:
        raise ValidationError("pb_disen_forward needs at least one input embedding")
    z = ad.concat_cols(*present) if len(present) > 1 else present[0]
    hidden = ad.relu(ad.add_row_bias(ad.matmul(z, params.mlp_w[0]), params.mlp_b[0]))
    h_ent = ad.add_row_bias(ad.matmul(hidden, params.mlp_w[1]), params.mlp_b[1])
    h_pot = h_ent
    for h in present:
        h_pot = ad.subtract(h_pot, h)
    return h_ent, h_pot


@dataclass
class DisentangledEmbeddings:
    h_attr: ad.Tensor = None
    h_stru: ad.Tensor = None
    h_ent: ad.Tensor = None
    h_pot: ad.Tensor = None
    h_final: ad.Tensor = None

    def blocks(self):
        """Present bias embeddings in canonical order as (tag, tensor)."""
        return [(tag, t) for tag, t in (("attr", self.h_attr), ("stru", self.h_stru), ("pot", self.h_pot))
                if t is not None]


def forward_full(inputs, params, ablation="none"):
    """Run the disentanglers, build ``[h_attr | h_stru | h_pot]`` and the 2-class logits."""
    abl = apply_ablation(ablation) if isinstance(ablation, str) else ablation
    emb = DisentangledEmbeddings()
    if abl.use_attr:
        emb.h_attr = ab_disen_forward(inputs.a_attr_norm, inputs.x, params)
    if abl.use_stru:
        emb.h_stru = sb_disen_forward(inputs.a_stru_norm, params)
    if abl.use_pot:
        emb.h_ent, emb.h_pot = pb_disen_forward(emb.h_attr, emb.h_stru, params)
    parts = [t for _, t in emb.blocks()]
    emb.h_final = ad.concat_cols(*parts) if len(parts) > 1 else parts[0]
    logits = ad.add_row_bias(ad.matmul(emb.h_final, params.w_cls), params.b_cls)
    return emb, logits


# ---------------------------------------------------------------------------
# vanilla GCN baseline


@dataclass
class GCNParams:
    weights: list
    biases: list

    def tensors(self):
        return self.weights + self.biases

    def snapshot(self):
        return [t.value.copy() for t in self.tensors()]

    def restore(self, values):
        for t, v in zip(self.tensors(), values):
            t.value = v.copy()
            t.grad = None

    def n_parameters(self):
        return sum(t.value.size for t in self.tensors())


def init_gcn_params(d, layers, seed, hidden=EMBED_DIM):
    if layers not in (1, 3):
        raise ValidationError(f"vanilla GCN depth must be 1 or 3, got {layers}")
    dims = [d] + [hidden] * (layers - 1) + [2]
    ws, bs = _stack(seed, _STREAM_GCN, dims, f"gcn{layers}")
    return GCNParams(ws, bs)


def gcn_forward(a_stru_norm, x, params):
    return gcn_stack(a_stru_norm, x, params.weights, params.biases)
