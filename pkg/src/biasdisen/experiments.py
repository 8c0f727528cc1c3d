"""Multi-seed runs, baselines, ablations, grid sweeps and dataset analysis."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product

from .errors import BiasDisenError
from .metrics import analyze
from .model import prepare_inputs
from .reporting import METRICS, RunReport
from .training import train, train_vanilla_gcn

logger = logging.getLogger(__name__)

ABLATION_ORDER = ("no_ab", "no_sb", "no_pb", "no_fh", "no_bco", "none")


def _run_job(job):
    graph, config, layers = job
    if layers:
        return train_vanilla_gcn(graph, layers, config)[1]
    return train(graph, config)[1]


def _run_jobs(graph, configs, layers=0, jobs=1):
    """Run one training per config; results come back in input order."""
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_job, [(graph, c, layers) for c in configs]))
    if layers:
        return [train_vanilla_gcn(graph, layers, c)[1] for c in configs]
    inputs = {}
    out = []
    for c in configs:
        if c.k not in inputs:
            inputs[c.k] = prepare_inputs(graph, c.k)
        out.append(train(graph, c, inputs=inputs[c.k])[1])
    return out


def run_seeds(graph, config, seeds, kind="model", jobs=1):
    configs = [config.with_(seed=s) for s in seeds]
    return RunReport(kind, config.with_(seed=seeds[0]).to_dict() | {"seed": None}, _run_jobs(graph, configs, jobs=jobs))


def run_baseline(graph, layers, config, seeds, jobs=1):
    configs = [config.with_(seed=s) for s in seeds]
    cfg = config.to_dict() | {"seed": None, "layers": layers}
    return RunReport(f"baseline_l{layers}", cfg, _run_jobs(graph, configs, layers=layers, jobs=jobs))


def run_ablation(graph, config, seeds, jobs=1):
    """Full model and the five ablated variants under identical seeds and splits."""
    return {tag: run_seeds(graph, config.with_(ablation=tag), seeds, kind=tag, jobs=jobs) for tag in ABLATION_ORDER}


@dataclass
class SweepResult:
    param_names: tuple
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def sweep(graph, config, seeds, alphas=None, betas=None, ks=None, jobs=1):
    """Grid over (alpha, beta) or over k; one training per cell and seed.

    Rows are ``(*cell, seed, metric, value)``. A failing cell/seed is recorded in
    ``failures`` and the sweep continues.
    """
    if ks is not None:
        names = ("k",)
        cells = [(k,) for k in ks]
    else:
        names = ("alpha", "beta")
        cells = list(product(alphas if alphas is not None else [config.alpha],
                             betas if betas is not None else [config.beta]))
    if not cells or not seeds:
        raise BiasDisenError("sweep needs a nonempty grid and at least one seed")
    result = SweepResult(names)
    for cell in cells:
        changes = dict(zip(names, cell))
        for seed in seeds:
            cfg = config.with_(seed=seed, **changes)
            try:
                run = _run_jobs(graph, [cfg], jobs=1)[0]
            except BiasDisenError as exc:
                logger.warning("sweep cell %s seed %d failed: %s", changes, seed, exc)
                result.failures.append({**changes, "seed": seed, "error": f"{type(exc).__name__}: {exc}"})
                continue
            for m in METRICS:
                result.rows.append((*cell, seed, m, getattr(run.metrics, m)))
    return result


def analyze_dataset(graph, alpha_prop=0.5, hops=2, gamma=0.5):
    rep = analyze(graph, alpha_prop, hops, gamma)
    return {
        "dataset": graph.name,
        "nodes": graph.n,
        "attributes": graph.d,
        "edges": graph.edge_counts(),
        **rep.to_dict(),
    }
