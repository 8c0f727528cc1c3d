"""Command-line entry point: ``biasdisen <command> ...``."""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import io
from .config import PRESETS, TrainConfig, preset
from .errors import BiasDisenError, ValidationError
from .experiments import analyze_dataset, run_ablation, run_baseline, run_seeds, sweep
from .model import ABLATIONS, forward_full, prepare_inputs
from .reporting import dumps_json, emit_report, sweep_csv
from .synthetic import biased_sbm
from .training import train

logger = logging.getLogger("biasdisen")


def _seed_list(text):
    try:
        seeds = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("seed list is empty")
    return seeds


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _add_data_args(p):
    g = p.add_argument_group("data")
    g.add_argument("--nodes", type=Path, help="canonical nodes CSV")
    g.add_argument("--edges", type=Path, help="canonical edges CSV")
    g.add_argument("--schema", type=Path, help="schema JSON (default: sens/label columns)")
    g.add_argument("--dataset", help="dataset name under the data root (default: the preset name)")
    g.add_argument("--data-root", type=Path, help=f"data root (default: ${io.DATA_ROOT_ENV} or ./data)")


def _add_train_args(p, seeds=True):
    p.add_argument("--preset", choices=sorted(PRESETS), help="per-dataset hyperparameters")
    if seeds:
        p.add_argument("--seeds", type=_seed_list, default=[0, 1, 2, 3, 4], help="comma-separated seeds")
    p.add_argument("--seed", type=int, help="single seed; overrides --seeds")
    p.add_argument("--epochs", type=int)
    p.add_argument("--alpha", type=float, help="weight of the subgroup W1 term")
    p.add_argument("--beta", type=float, help="weight of the block separation term")
    p.add_argument("--k", type=int, help="neighbours in the attribute k-NN graph")
    p.add_argument("--lr-attr", type=float)
    p.add_argument("--lr-stru", type=float)
    p.add_argument("--lr-pot", type=float)
    p.add_argument("--lr-baseline", type=float)
    p.add_argument("--weight-decay", type=float)
    p.add_argument("--ablation", choices=sorted(ABLATIONS))
    p.add_argument("--selection", choices=("acc_minus_fair", "acc", "last"))
    p.add_argument("--eval-every", type=int)
    p.add_argument("--bco-clamp", type=float)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent runs")
    p.add_argument("--out", type=Path, help="output directory")
    _add_data_args(p)


def _config(args):
    overrides = dict(
        epochs=args.epochs, alpha=args.alpha, beta=args.beta, k=args.k,
        lr_attr=args.lr_attr, lr_stru=args.lr_stru, lr_pot=args.lr_pot, lr_baseline=args.lr_baseline,
        weight_decay=args.weight_decay, ablation=args.ablation, selection=args.selection,
        eval_every=args.eval_every, bco_clamp=args.bco_clamp,
    )
    if args.preset:
        return preset(args.preset, **overrides)
    return TrainConfig().with_(**overrides)


def _seeds(args):
    if args.seed is not None:
        return [args.seed]
    return getattr(args, "seeds", [0])


def _graph(args):
    if args.nodes or args.edges:
        if not (args.nodes and args.edges):
            raise ValidationError("--nodes and --edges must be given together")
        schema = io.DatasetSchema.from_json(args.schema) if args.schema else None
        return io.load_dataset(args.nodes, args.edges, schema, name=args.nodes.parent.name)
    name = args.dataset or getattr(args, "preset", None)
    if not name:
        raise ValidationError("give --nodes/--edges, --dataset or --preset")
    nodes, _, _ = io.dataset_paths(name, args.data_root)
    if not nodes.exists():
        raise BiasDisenError(
            f"dataset {name!r} not found at {nodes.parent}; set --data-root or ${io.DATA_ROOT_ENV}, "
            f"or build it with convert-{name.replace('_', '-')}"
        )
    return io.load_named(name, args.data_root)


def _emit(reports, args, stem):
    if args.out:
        emit_report(reports, args.out, stem=stem)
    doc = reports[0].to_dict() if len(reports) == 1 else {r.kind: r.to_dict() for r in reports}
    sys.stdout.write(dumps_json(doc))


def cmd_analyze(args):
    out = analyze_dataset(_graph(args), args.alpha_prop, args.hops, args.gamma)
    text = dumps_json(out)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def cmd_train(args):
    graph = _graph(args)
    _emit([run_seeds(graph, _config(args), _seeds(args), jobs=args.jobs)], args, "train")


def cmd_baseline(args):
    graph = _graph(args)
    _emit([run_baseline(graph, args.layers, _config(args), _seeds(args), jobs=args.jobs)], args, f"baseline_l{args.layers}")


def cmd_ablate(args):
    graph = _graph(args)
    reports = run_ablation(graph, _config(args), _seeds(args), jobs=args.jobs)
    _emit(list(reports.values()), args, "ablation")


def cmd_sweep(args):
    if args.ks is None and args.alphas is None and args.betas is None:
        raise ValidationError("sweep needs --alphas/--betas or --ks")
    if args.ks is not None and (args.alphas is not None or args.betas is not None):
        raise ValidationError("--ks cannot be combined with --alphas/--betas")
    graph = _graph(args)
    res = sweep(graph, _config(args), _seeds(args), alphas=args.alphas, betas=args.betas, ks=args.ks, jobs=args.jobs)
    text = sweep_csv(res.rows, res.param_names)
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "sweep.csv").write_text(text, encoding="utf-8")
        (args.out / "sweep.failures.json").write_text(dumps_json(res.failures), encoding="utf-8")
    sys.stdout.write(text)
    if res.failures:
        logger.warning("%d sweep runs failed; see sweep.failures.json", len(res.failures))


def cmd_embeddings(args):
    graph = _graph(args)
    config = _config(args).with_(seed=args.seed if args.seed is not None else 0)
    inputs = prepare_inputs(graph, config.k)
    params, _ = train(graph, config, inputs=inputs)
    emb, _ = forward_full(inputs, params, config.ablation)
    args.out.mkdir(parents=True, exist_ok=True)
    for tag, t in emb.blocks():
        path = args.out / f"embedding_{tag}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node_id", "block"] + [f"e{j}" for j in range(t.shape[1])])
            for i, row in enumerate(t.value):
                w.writerow([i, tag] + [repr(float(v)) for v in row])
        print(path)


def cmd_convert(args):
    counts = io.convert_raw(args.dataset_name, args.raw, args.out)
    sys.stdout.write(json.dumps(counts, indent=2) + "\n")


def cmd_make_synthetic(args):
    g = biased_sbm(n=args.n, d=args.d, p_in=args.p_in, p_out=args.p_out, attr_shift=args.attr_shift, seed=args.seed)
    io.export_dataset(g, args.out)
    print(args.out)


def build_parser():
    parser = argparse.ArgumentParser(prog="biasdisen", description="Bias-disentangled fair node classification.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="dataset fairness metrics as JSON")
    _add_data_args(p)
    p.add_argument("--alpha-prop", type=float, default=0.5)
    p.add_argument("--hops", type=int, default=2)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--out", type=Path, help="write the JSON report here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("train", help="train the disentangled model over seeds")
    _add_train_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("baseline", help="vanilla GCN baseline")
    _add_train_args(p)
    p.add_argument("--layers", type=int, choices=(1, 3), required=True)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("ablate", help="full model and the five ablated variants")
    _add_train_args(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep", help="grid over alpha x beta or over k; long-format CSV")
    _add_train_args(p)
    p.add_argument("--alphas", type=_float_list)
    p.add_argument("--betas", type=_float_list)
    p.add_argument("--ks", type=_int_list)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("embeddings", help="train one seed and dump the per-block embeddings")
    _add_train_args(p, seeds=False)
    p.set_defaults(func=cmd_embeddings)

    for name in io.RAW_FORMATS:
        p = sub.add_parser(f"convert-{name.replace('_', '-')}", help=f"canonical CSVs from the raw {name} release")
        p.add_argument("--raw", type=Path, required=True, help="directory with the raw files")
        p.add_argument("--out", type=Path, required=True)
        p.set_defaults(func=cmd_convert, dataset_name=name)

    p = sub.add_parser("make-synthetic", help="write a small biased two-block graph in canonical form")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--p-in", type=float, default=0.08)
    p.add_argument("--p-out", type=float, default=0.01)
    p.add_argument("--attr-shift", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_synthetic)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command == "embeddings" and args.out is None:
        parser.error("embeddings requires --out DIR")
    try:
        args.func(args)
    except BiasDisenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
