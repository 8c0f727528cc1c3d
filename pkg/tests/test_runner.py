import json

import numpy as np
import pytest

from biasdisen import experiments
from biasdisen.config import PRESETS, TrainConfig, preset
from biasdisen.errors import NumericError, UndefinedMetricError, ValidationError
from biasdisen.graph import AttributedGraph, edges_to_adjacency
from biasdisen.experiments import analyze_dataset, run_ablation, run_baseline, run_seeds, sweep
from biasdisen.reporting import METRICS, emit_report
from biasdisen.synthetic import biased_sbm
from biasdisen.training import _Selector, train, train_vanilla_gcn

FAST = TrainConfig(epochs=30, k=5, eval_every=5)


@pytest.fixture(scope="module")
def graph():
    return biased_sbm(n=60, d=5, p_in=0.2, p_out=0.03, seed=2)


def test_config_validation():
    for bad in (dict(epochs=0), dict(k=0), dict(lr_attr=0.0), dict(lr_pot=-1.0), dict(ablation="x"),
                dict(selection="best")):
        with pytest.raises(ValidationError):
            TrainConfig(**bad)


def test_presets():
    assert set(PRESETS) == {"nba", "recidivism", "credit", "pokec_n", "pokec_z"}
    nba = preset("nba")
    assert (nba.k, nba.alpha, nba.beta, nba.lr_pot) == (40, 1.0, 0.0003, 0.0005)
    assert (nba.lr_attr, nba.lr_stru, nba.weight_decay, nba.epochs, nba.hidden) == (0.001, 0.0003, 1e-5, 1000, 16)
    assert preset("credit", seed=3).seed == 3 and preset("pokec_z").alpha == 100.0
    with pytest.raises(ValidationError):
        preset("cora")


def test_train_deterministic(graph):
    _, a = train(graph, FAST)
    _, b = train(graph, FAST)
    assert a.to_dict() == b.to_dict()
    assert a.history == b.history


def test_single_epoch_is_valid(graph):
    _, run = train(graph, FAST.with_(epochs=1))
    assert run.selected_epoch == 1 and len(run.history) == 1
    for m in METRICS:
        assert 0 <= getattr(run.metrics, m) <= 1


def test_history_fields(graph):
    _, run = train(graph, FAST)
    h = run.history[0]
    assert list(h) == ["epoch", "l_primary", "l_fh", "l_bco", "l_total"]
    assert h["l_total"] == pytest.approx(h["l_primary"] + FAST.alpha * h["l_fh"] + FAST.beta * h["l_bco"], rel=1e-15)


def test_selection_skips_undefined():
    sel = _Selector("acc")

    class G:
        y = np.array([1, 1, 0, 0])
        s = np.array([0, 0, 0, 0])

    sel.offer(10, np.array([0.9, 0.9, 0.1, 0.1]), G, np.arange(4), lambda: "snap")
    with pytest.raises(UndefinedMetricError):
        sel.result()
    G.s = np.array([0, 1, 0, 1])
    sel.offer(20, np.array([0.9, 0.9, 0.1, 0.1]), G, np.arange(4), lambda: "snap20")
    sel.offer(30, np.array([0.9, 0.9, 0.1, 0.1]), G, np.arange(4), lambda: "snap30")
    assert sel.result()[0] == 20  # ties keep the earliest


def test_numeric_failure_reports_epoch(graph, monkeypatch):
    import biasdisen.training as tr

    real = tr.total_loss
    calls = {"n": 0}

    def flaky(*a, **kw):
        calls["n"] += 1
        if calls["n"] == 3:
            raise NumericError("non-finite value produced by test")
        return real(*a, **kw)

    monkeypatch.setattr(tr, "total_loss", flaky)
    with pytest.raises(NumericError, match="epoch 3"):
        train(graph, FAST)


def test_vanilla_gcn(graph):
    _, a = train_vanilla_gcn(graph, 3, FAST)
    _, b = train_vanilla_gcn(graph, 3, FAST)
    assert a.to_dict() == b.to_dict()
    _, one = train_vanilla_gcn(graph, 1, FAST)
    assert one.to_dict() != a.to_dict()
    with pytest.raises(ValidationError):
        train_vanilla_gcn(graph, 2, FAST)


def test_run_report_aggregates(graph):
    rep = run_seeds(graph, FAST, [0, 1, 2])
    d = rep.to_dict()
    assert d["seeds"] == [0, 1, 2] and d["config"]["seed"] is None
    for m in METRICS:
        vals = [r[m] for r in d["runs"]]
        assert d["mean"][m] == pytest.approx(np.mean(vals), abs=1e-12)
        assert d["std"][m] == pytest.approx(np.std(vals), abs=1e-12)
    assert "wall_clock" not in json.dumps(d)


def test_ablation_set(graph):
    reps = run_ablation(graph, FAST, [0, 1])
    assert list(reps) == ["no_ab", "no_sb", "no_pb", "no_fh", "no_bco", "none"]
    direct = [train(graph, FAST.with_(seed=s))[1].to_dict() for s in (0, 1)]
    assert reps["none"].to_dict()["runs"] == direct


def test_sweep_cardinality_and_slices(graph):
    res = sweep(graph, FAST, [0, 1], alphas=[0.0, 1.0, 2.0], betas=[0.0, 0.0003, 0.001])
    assert res.param_names == ("alpha", "beta") and not res.failures
    for m in METRICS:
        assert sum(1 for r in res.rows if r[3] == m) == 18
    no_fh = run_seeds(graph, FAST.with_(ablation="no_fh", beta=0.001), [0, 1])
    no_bco = run_seeds(graph, FAST.with_(ablation="no_bco", alpha=2.0), [0, 1])
    for rep, cell in ((no_fh, (0.0, 0.001)), (no_bco, (2.0, 0.0))):
        for run in rep.runs:
            for m in METRICS:
                row = [r for r in res.rows if r[:2] == cell and r[2] == run.seed and r[3] == m]
                assert row[0][4] == getattr(run.metrics, m)


def test_sweep_k_and_failure_isolation(graph, monkeypatch):
    real = experiments.train

    def boom(g, cfg, **kw):
        if cfg.k == 3 and cfg.seed == 1:
            raise NumericError("epoch 7: non-finite value produced by spmm")
        return real(g, cfg, **kw)

    monkeypatch.setattr(experiments, "train", boom)
    res = sweep(graph, FAST, [0, 1], ks=[3, 6])
    assert res.param_names == ("k",)
    assert res.failures == [{"k": 3, "seed": 1, "error": "NumericError: epoch 7: non-finite value produced by spmm"}]
    assert len(res.rows) == 3 * len(METRICS)


def test_emit_report_formats(graph, tmp_path):
    rep = run_baseline(graph, 1, FAST, [0, 1])
    emit_report(rep, tmp_path)
    doc = json.loads((tmp_path / "report.json").read_text())
    lines = (tmp_path / "report.csv").read_text().splitlines()
    assert lines[0] == "kind,seed,metric,value"
    for line in lines[1:]:
        kind, seed, metric, value = line.split(",")
        src = doc[seed] if seed in ("mean", "std") else doc["runs"][[str(s) for s in doc["seeds"]].index(seed)]
        assert float(value) == src[metric]
    curve = (tmp_path / doc["loss_curves"][0]).read_text().splitlines()
    assert len(curve) == FAST.epochs and json.loads(curve[0])["epoch"] == 1
    assert json.loads((tmp_path / "report.timing.json").read_text())["baseline_l1"].keys() == {"0", "1"}
    with pytest.raises(ValidationError):
        emit_report([], tmp_path)


def test_emit_report_byte_identical(graph, tmp_path):
    for d in ("a", "b"):
        emit_report(run_seeds(graph, FAST, [0, 1]), tmp_path / d)
    for f in ("report.json", "report.csv", "loss_model_seed0.jsonl"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_parallel_jobs_match_serial(graph):
    serial = run_seeds(graph, FAST, [0, 1]).to_dict()
    parallel = run_seeds(graph, FAST, [0, 1], jobs=2).to_dict()
    assert serial == parallel


def test_analyze_dataset_report(graph):
    rep = analyze_dataset(graph)
    assert rep["edges"] == {"undirected": graph.m, "directed_entries": 2 * graph.m}
    assert set(rep) >= {"attr_bias", "stru_bias", "homo_ratio", "nbhd_fair", "alpha_prop", "hops", "gamma"}


def test_learns_when_edges_follow_labels():
    g = biased_sbm(n=400, d=10, seed=0)
    rng = np.random.default_rng(1)
    iu, ju = np.triu_indices(g.n, 1)
    prob = np.where(g.y[iu] == g.y[ju], 0.05, 0.01) * np.where(g.s[iu] == g.s[ju], 1.5, 0.5)
    keep = rng.random(iu.size) < prob
    h = AttributedGraph(edges_to_adjacency(iu[keep], ju[keep], g.n), g.x, g.s, g.y, g.label_mask)
    _, run = train(h, TrainConfig(epochs=300, k=10))
    assert run.metrics.acc > 0.7  # chance is 0.5
    _, base = train_vanilla_gcn(h, 3, TrainConfig(epochs=300))
    assert base.metrics.acc > 0.9
