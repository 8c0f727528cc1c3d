"""Full-batch training of the disentangled model and of the vanilla GCN baselines."""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .errors import NumericError, UndefinedMetricError
from .graph import normalize_adjacency, split_nodes
from .metrics import prediction_report
from .model import apply_ablation, forward_full, gcn_forward, init_gcn_params, init_params, prepare_inputs
from .objectives import LossWeights, total_loss
from .optim import Adam

logger = logging.getLogger(__name__)


@dataclass
class SeedRun:
    seed: int
    metrics: object
    selected_epoch: int
    val_score: float
    history: list = field(default_factory=list)
    wall_clock: float = 0.0

    def to_dict(self):
        out = {"seed": self.seed, "selected_epoch": self.selected_epoch, "val_score": self.val_score}
        out.update(self.metrics.to_dict())
        return out


def class1_scores(logits):
    z = logits.value
    # tanh form of the logistic: no overflow for large logit gaps
    return 0.5 * (1.0 + np.tanh(0.5 * (z[:, 1] - z[:, 0])))


def selection_score(report, rule):
    if rule == "acc_minus_fair":
        return report.acc - report.sp - report.eo
    if rule == "acc":
        return report.acc
    return 0.0


class _Selector:
    """Keeps the best checkpoint under a rule; skips checkpoints whose val metrics are undefined."""

    def __init__(self, rule):
        self.rule = rule
        self.best = None

    def offer(self, epoch, scores, graph, val, snapshot):
        try:
            rep = prediction_report(scores[val], graph.y[val], graph.s[val])
        except UndefinedMetricError as exc:
            logger.debug("epoch %d: validation metrics undefined (%s)", epoch, exc)
            return
        score = selection_score(rep, self.rule)
        if self.best is None or self.rule == "last" or score > self.best[1]:
            self.best = (epoch, score, snapshot())

    def result(self):
        if self.best is None:
            raise UndefinedMetricError("no checkpoint had defined validation metrics")
        return self.best


def _is_eval_epoch(epoch, config):
    return epoch % config.eval_every == 0 or epoch == config.epochs


def _final_report(scores, graph, split):
    test = split.test
    return prediction_report(scores[test], graph.y[test], graph.s[test])


def train(graph, config, inputs=None, split=None):
    """Train one seed. Returns ``(params, SeedRun)`` with params restored to the selected checkpoint."""
    start = time.perf_counter()
    abl = apply_ablation(config.ablation)
    split = split if split is not None else split_nodes(graph, config.seed)
    inputs = inputs if inputs is not None else prepare_inputs(graph, config.k)
    params = init_params(graph.n, graph.d, config.seed, abl, p=config.hidden)
    lrs = {"attr": config.lr_attr, "stru": config.lr_stru, "pot": config.lr_pot}
    opts = [Adam(group, lrs[tag], config.weight_decay) for tag, group in params.groups().items() if group]
    weights = LossWeights(alpha=config.alpha if abl.use_fh else 0.0, beta=config.beta if abl.use_bco else 0.0)
    selector = _Selector(config.selection)
    history = []
    for epoch in range(1, config.epochs + 1):
        try:
            emb, logits = forward_full(inputs, params, abl)
            br = total_loss(logits, graph.y, split.train, emb, graph.s, weights, config.bco_clamp)
            br.total.backward()
            for opt in opts:
                opt.step()
            if _is_eval_epoch(epoch, config):
                _, logits = forward_full(inputs, params, abl)
        except NumericError as exc:
            raise NumericError(f"epoch {epoch}: {exc}") from exc
        history.append({"epoch": epoch, **br.to_dict()})
        if _is_eval_epoch(epoch, config):
            selector.offer(epoch, class1_scores(logits), graph, split.val, params.snapshot)
    epoch, score, snap = selector.result()
    params.restore(snap)
    _, logits = forward_full(inputs, params, abl)
    report = _final_report(class1_scores(logits), graph, split)
    run = SeedRun(config.seed, report, epoch, float(score), history, time.perf_counter() - start)
    logger.info("seed %d: selected epoch %d, test %s", config.seed, epoch, report)
    return params, run


def train_vanilla_gcn(graph, layers, config, split=None):
    """Plain GCN on the input graph and raw attributes with the NLL loss only."""
    start = time.perf_counter()
    split = split if split is not None else split_nodes(graph, config.seed)
    a_norm = normalize_adjacency(graph.adjacency, add_self_loops=True)
    x = ad.constant(graph.x)
    params = init_gcn_params(graph.d, layers, config.seed, hidden=config.hidden)
    opt = Adam(params.tensors(), config.lr_baseline, config.weight_decay)
    selector = _Selector(config.baseline_selection)
    history = []
    for epoch in range(1, config.epochs + 1):
        try:
            logits = gcn_forward(a_norm, x, params)
            loss = ad.log_softmax_nll(logits, graph.y, split.train)
            loss.backward()
            opt.step()
            if _is_eval_epoch(epoch, config):
                logits = gcn_forward(a_norm, x, params)
        except NumericError as exc:
            raise NumericError(f"epoch {epoch}: {exc}") from exc
        history.append({"epoch": epoch, "l_primary": loss.item(), "l_total": loss.item()})
        if _is_eval_epoch(epoch, config):
            selector.offer(epoch, class1_scores(logits), graph, split.val, params.snapshot)
    epoch, score, snap = selector.result()
    params.restore(snap)
    report = _final_report(class1_scores(gcn_forward(a_norm, x, params)), graph, split)
    run = SeedRun(config.seed, report, epoch, float(score), history, time.perf_counter() - start)
    return params, run
