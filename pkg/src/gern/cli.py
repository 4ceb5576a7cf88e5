"""Command-line interface.

Every run writes run.json (arguments, package version, seed, timings) into
the output directory; tabular results go to CSV or JSON per --format.
"""

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from . import __version__, backend, datasets, diagnostics, gnn, linearize
from . import resistance as resistance_mod
from . import spanning, trainer, wta
from .rng import RngStream


def _table(outdir, name, fmt, header, rows):
    if fmt == "json":
        path = os.path.join(outdir, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump([dict(zip(header, row)) for row in rows], fh, indent=2)
            fh.write("\n")
    else:
        path = os.path.join(outdir, f"{name}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    return path


def _write_json(outdir, name, payload):
    path = os.path.join(outdir, f"{name}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=float)
        fh.write("\n")
    return path


def _run_meta(args, started, extra=None):
    payload = {
        "command": args.command,
        "version": __version__,
        "backend": backend.BACKEND,
        "seed": args.seed,
        "args": {k: v for k, v in vars(args).items() if k != "func"},
        "wall_seconds": time.perf_counter() - started,
    }
    if extra:
        payload.update(extra)
    return payload


def _load_bundle(args):
    return datasets.load_bundle(args.data, largest_component=args.largest_component)


def _add_bundle_arg(p):
    p.add_argument("--data", required=True, help="bundle directory")
    p.add_argument("--largest-component", action="store_true",
                   help="proceed on the giant component if disconnected")


def _add_split_args(p):
    p.add_argument("--per-class", type=int, default=None,
                   help="labeled nodes per class (default 20 unless --train-fraction)")
    p.add_argument("--train-fraction", type=float, default=None)
    p.add_argument("--val-size", type=int, default=None)
    p.add_argument("--split-seed", type=int, default=None,
                   help="defaults to --seed")


def _make_split(args, bundle):
    per_class, fraction = args.per_class, args.train_fraction
    if per_class is None and fraction is None:
        per_class = 20
    rng = RngStream(args.split_seed if args.split_seed is not None else args.seed, 77)
    return datasets.make_split(bundle.labels, rng, per_class=per_class,
                               fraction=fraction, val_size=args.val_size)


_CONFIG_FIELDS = ("z", "k", "hidden", "pool_size", "beta", "generator", "lr0",
                  "weight_decay", "lr_decay_factor", "patience", "lr_min",
                  "max_steps_per_lr", "dropout", "val_every", "mode")


def _build_config(args):
    cfg = trainer.TrainConfig(seed=args.seed)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, value = line.partition("=")
                key = key.strip().replace("-", "_")
                if key not in _CONFIG_FIELDS:
                    raise ValueError(f"unknown config key {key!r}")
                current = getattr(cfg, key)
                setattr(cfg, key, type(current)(value.strip())
                        if not isinstance(current, str) else value.strip())
    for key in _CONFIG_FIELDS:  # explicit CLI flags win over the file
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg.validate()


def cmd_train(args):
    started = time.perf_counter()
    bundle = _load_bundle(args)
    cfg = _build_config(args)
    split = _make_split(args, bundle)
    result = trainer.train_gern(bundle.graph, bundle.features, bundle.labels, split, cfg)
    test_acc = trainer.evaluate(result.model, bundle.graph, bundle.features,
                                bundle.labels, split.test) if split.test.size else None
    header = ["epoch", "train_loss", "val_loss", "val_accuracy", "lr",
              "pool_index", "wall_time", "train_edges"]
    rows = [[r.epoch, r.train_loss, r.val_loss, r.val_accuracy, r.lr,
             r.pool_index, r.wall_time, r.train_edges]
            for r in result.history.records]
    _table(args.output_dir, "history", args.format, header, rows)
    ckpt = os.path.join(args.output_dir, "model.ckpt")
    result.model.save(ckpt)
    epoch_ms = [r.wall_time * 1e3 for r in result.history.records]
    metrics = {
        "best_epoch": result.history.best_epoch,
        "best_val_accuracy": result.history.best_val_accuracy,
        "test_accuracy": test_acc,
        "epochs_run": result.history.epochs_run,
        "mean_epoch_ms": float(np.mean(epoch_ms)),
        "checkpoint": ckpt,
        "split": {"train": len(split.train), "val": len(split.val),
                  "test": len(split.test)},
    }
    _write_json(args.output_dir, "metrics", metrics)
    _write_json(args.output_dir, "run", _run_meta(args, started, {
        "config": {f: getattr(cfg, f) for f in _CONFIG_FIELDS},
        "mean_epoch_ms": metrics["mean_epoch_ms"],
    }))
    print(f"best val accuracy {result.history.best_val_accuracy:.4f} "
          f"at epoch {result.history.best_epoch}; "
          f"test accuracy {test_acc if test_acc is None else round(test_acc, 4)}")


def cmd_evaluate(args):
    started = time.perf_counter()
    bundle = _load_bundle(args)
    model = gnn.GCNModel.load(args.checkpoint)
    if args.subset == "all":
        subset = np.arange(bundle.graph.n, dtype=np.int64)
    else:
        split = _make_split(args, bundle)
        subset = getattr(split, {"train": "train", "val": "val", "test": "test"}[args.subset])
    acc = trainer.evaluate(model, bundle.graph, bundle.features, bundle.labels,
                           subset, block_size=args.block_size)
    _write_json(args.output_dir, "evaluation", {
        "subset": args.subset, "size": int(len(subset)), "accuracy": acc,
    })
    _write_json(args.output_dir, "run", _run_meta(args, started))
    print(f"accuracy on {args.subset} ({len(subset)} nodes): {acc:.4f}")


def cmd_rst_stats(args):
    started = time.perf_counter()
    bundle = _load_bundle(args)
    g = bundle.graph
    rng = RngStream(args.seed, 11)
    table = spanning.edge_inclusion_frequencies(g, args.generator, args.draws,
                                                rng, beta=args.beta)
    rows = [[int(u), int(v), float(f), float(s)]
            for (u, v), f, s in zip(g.edges, table.frequencies, table.stderrs)]
    _table(args.output_dir, "edge_frequencies", args.format,
           ["edge_u", "edge_v", "freq", "stderr"], rows)
    summary = {"generator": args.generator, "draws": args.draws, "beta": args.beta}
    if args.baseline:
        base = spanning.edge_inclusion_frequencies(
            g, args.baseline, args.draws, RngStream(args.seed, 12), beta=args.beta)
        summary["baseline"] = args.baseline
        summary["comparison"] = spanning.compare_frequency_tables(table, base)
    if g.n <= args.exact_cap:
        exact = resistance_mod.effective_resistance_exact(g)
        gap = np.abs(table.frequencies - exact.edge_resistances())
        summary["mean_abs_gap_vs_exact"] = float(gap.mean())
    _write_json(args.output_dir, "rst_stats", summary)
    _write_json(args.output_dir, "run", _run_meta(args, started))
    print(json.dumps(summary, indent=2, default=float))


def cmd_resistance(args):
    started = time.perf_counter()
    bundle = _load_bundle(args)
    g = bundle.graph
    exact = mc = None
    if args.method in ("exact", "both"):
        exact = resistance_mod.effective_resistance_exact(g)
    if args.method in ("mc", "both"):
        mc = resistance_mod.effective_resistance_mc(
            g, args.draws, RngStream(args.seed, 13), method=args.generator,
            beta=args.beta)
    header = ["edge_u", "edge_v"]
    cols = []
    if exact is not None:
        header.append("r_exact")
        cols.append(exact.edge_resistances())
    if mc is not None:
        header.append("r_mc")
        cols.append(mc.edge_values)
    rows = [[int(u), int(v), *[float(c[i]) for c in cols]]
            for i, (u, v) in enumerate(g.edges)]
    _table(args.output_dir, "edge_resistance", args.format, header, rows)
    summary = {}
    res_for_phi = exact if exact is not None else mc
    summary["phi_r"] = resistance_mod.resistance_weighted_cutsize(
        g, bundle.labels, res_for_phi)
    from .graph import cutsize
    summary["phi"] = cutsize(g, bundle.labels)
    _write_json(args.output_dir, "resistance_summary", summary)
    _write_json(args.output_dir, "run", _run_meta(args, started))
    print(json.dumps(summary, indent=2, default=float))


def cmd_linearize(args):
    started = time.perf_counter()
    bundle = _load_bundle(args)
    rng = RngStream(args.seed, 14)
    tree = spanning.sample_tree(bundle.graph, rng, method=args.generator,
                                beta=args.beta)
    path = linearize.dfs_linearize(tree, rng)
    _table(args.output_dir, "tree_edges", args.format, ["u", "v"],
           [[int(u), int(v)] for u, v in tree.edges])
    _table(args.output_dir, "path_order", args.format, ["position", "node"],
           [[i, int(v)] for i, v in enumerate(path.order)])
    from .graph import cutsize
    from .linearize import path_cutsize
    summary = {
        "generator": args.generator,
        "tree_cutsize": tree.cutsize(bundle.labels),
        "path_cutsize": path_cutsize(path, bundle.labels),
        "graph_cutsize": cutsize(bundle.graph, bundle.labels),
    }
    _write_json(args.output_dir, "run", _run_meta(args, started, summary))
    print(json.dumps(summary, indent=2))


def cmd_wta(args):
    started = time.perf_counter()
    bundle = _load_bundle(args)
    rng = RngStream(args.seed, 15)
    out = wta.wta_expected_mistakes(bundle.graph, bundle.labels, args.trials, rng,
                                    order_mode=args.order_mode,
                                    default_label=args.default_label)
    _table(args.output_dir, "wta_trials", args.format, ["trial", "mistakes"],
           [[i, int(m)] for i, m in enumerate(out["per_trial"])])
    summary = {"mean": out["mean"], "stderr": out["stderr"], "trials": args.trials,
               "n": bundle.graph.n}
    _write_json(args.output_dir, "wta_summary", summary)
    _write_json(args.output_dir, "run", _run_meta(args, started))
    print(json.dumps(summary, indent=2, default=float))


def cmd_diagnostics(args):
    started = time.perf_counter()
    bundle = _load_bundle(args)
    depths = [int(d) for d in args.depths.split(",")]
    rows = []
    if args.kind in ("smoothing", "both"):
        runs = diagnostics.oversmoothing_curve(
            bundle.graph, depths, args.width, args.trials, RngStream(args.seed, 16))
        rows += [["smoothing", r.variant, r.depth, r.mean, r.stderr] for r in runs]
    if args.kind in ("squashing", "both"):
        runs = diagnostics.oversquashing_experiment(
            bundle.graph, depths, args.width, args.trials, RngStream(args.seed, 17),
            probes=args.probes)
        rows += [["squashing", r.variant, r.depth, r.mean, r.stderr] for r in runs]
    _table(args.output_dir, "diagnostics", args.format,
           ["metric", "variant", "depth", "mean", "stderr"], rows)
    _write_json(args.output_dir, "run", _run_meta(args, started))
    for row in rows:
        print(f"{row[0]:9s} {row[1]:4s} depth={row[2]} mean={row[3]:.4g} "
              f"stderr={row[4]:.3g}")


def cmd_synth(args):
    started = time.perf_counter()
    rng = RngStream(args.seed, 18)
    if args.family == "clique-chain":
        bundle = datasets.synth_clique_chain(args.cliques, args.clique_size, rng,
                                             noise_std=args.noise_std)
    else:
        bundle = datasets.synth_sbm(args.blocks, args.block_size, args.p_in,
                                    args.p_out, rng, noise_std=args.noise_std)
    datasets.save_bundle(bundle, args.out, binary_features=args.binary_features)
    _write_json(args.output_dir, "run", _run_meta(args, started, {
        "n": bundle.graph.n, "m": bundle.graph.m, "out": args.out,
    }))
    print(f"wrote {bundle.name}: n={bundle.graph.n} m={bundle.graph.m} -> {args.out}")


def cmd_convert(args):
    started = time.perf_counter()
    bundle = datasets.load_bundle(args.input, largest_component=args.largest_component)
    if args.row_normalize:
        bundle.features = datasets.row_normalize(bundle.features)
        bundle.meta["row_normalized"] = "true"
    datasets.save_bundle(bundle, args.out, binary_features=args.features == "binary")
    _write_json(args.output_dir, "run", _run_meta(args, started, {
        "n": bundle.graph.n, "m": bundle.graph.m,
        "dropped_self_loops": bundle.graph.dropped_self_loops,
        "dropped_duplicates": bundle.graph.dropped_duplicates,
    }))
    print(f"converted {args.input} -> {args.out} "
          f"(n={bundle.graph.n}, m={bundle.graph.m})")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gern",
        description="Train GCNs on random path graphs; inspect spanning-tree "
                    "and effective-resistance structure.",
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=None,
                        help="compiled-kernel thread count")
    parser.add_argument("--output-dir", default=".")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run the pool-of-paths training loop")
    _add_bundle_arg(p)
    _add_split_args(p)
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--z", "--max-epochs", dest="z", type=int, default=None)
    p.add_argument("--k", type=int, default=None, help="layers / hop radius")
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--pool-size", type=int, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--generator", choices=spanning.GENERATORS, default=None)
    p.add_argument("--lr0", type=float, default=None)
    p.add_argument("--weight-decay", type=float, default=None)
    p.add_argument("--lr-decay-factor", type=float, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--lr-min", type=float, default=None)
    p.add_argument("--max-steps-per-lr", type=int, default=None)
    p.add_argument("--dropout", type=float, default=None)
    p.add_argument("--val-every", type=int, default=None)
    p.add_argument("--mode", choices=trainer.TRAIN_MODES, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="accuracy of a checkpoint on a subset")
    _add_bundle_arg(p)
    _add_split_args(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--subset", choices=("train", "val", "test", "all"), default="test")
    p.add_argument("--block-size", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("rst-stats", help="edge-inclusion frequencies of a sampler")
    _add_bundle_arg(p)
    p.add_argument("--generator", choices=spanning.GENERATORS, default="wilson")
    p.add_argument("--baseline", choices=spanning.GENERATORS, default=None,
                   help="second sampler to compare against")
    p.add_argument("--draws", type=int, default=10000)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--exact-cap", type=int, default=2000,
                   help="compute the exact-resistance gap when n is at most this")
    p.set_defaults(func=cmd_rst_stats)

    p = sub.add_parser("resistance", help="effective resistances and phi_R")
    _add_bundle_arg(p)
    p.add_argument("--method", choices=("exact", "mc", "both"), default="exact")
    p.add_argument("--draws", type=int, default=10000)
    p.add_argument("--generator", choices=spanning.GENERATORS, default="wilson")
    p.add_argument("--beta", type=float, default=0.5)
    p.set_defaults(func=cmd_resistance)

    p = sub.add_parser("linearize", help="draw a tree, emit its DFS path")
    _add_bundle_arg(p)
    p.add_argument("--generator", choices=spanning.GENERATORS, default="a_rst")
    p.add_argument("--beta", type=float, default=0.5)
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("wta", help="nearest-revealed-neighbor mistake counts")
    _add_bundle_arg(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--order-mode", choices=("random", "adversarial-stub"),
                   default="random")
    p.add_argument("--default-label", type=int, default=0)
    p.set_defaults(func=cmd_wta)

    p = sub.add_parser("diagnostics", help="over-smoothing / over-squashing curves")
    _add_bundle_arg(p)
    p.add_argument("--kind", choices=("smoothing", "squashing", "both"),
                   default="both")
    p.add_argument("--depths", default="2,3,4,5")
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--probes", type=int, default=20)
    p.set_defaults(func=cmd_diagnostics)

    p = sub.add_parser("synth", help="generate a synthetic bundle")
    p.add_argument("--family", choices=("clique-chain", "sbm"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cliques", type=int, default=3)
    p.add_argument("--clique-size", type=int, default=3)
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--block-size", type=int, default=25)
    p.add_argument("--p-in", type=float, default=0.5)
    p.add_argument("--p-out", type=float, default=0.05)
    p.add_argument("--noise-std", type=float, default=_noise_default())
    p.add_argument("--binary-features", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("convert", help="re-encode a bundle (features text/binary)")
    p.add_argument("--input", required=True, help="source bundle directory")
    p.add_argument("--out", required=True)
    p.add_argument("--features", choices=("text", "binary"), default="text")
    p.add_argument("--row-normalize", action="store_true")
    p.add_argument("--largest-component", action="store_true")
    p.set_defaults(func=cmd_convert)

    return parser


def _noise_default():
    return datasets._NOISE_STD


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None and backend.BACKEND == "numba":
        import numba

        numba.set_num_threads(args.threads)
    os.makedirs(args.output_dir, exist_ok=True)
    try:
        args.func(args)
    except Exception as exc:  # surface library errors as clean CLI failures
        if os.environ.get("GERN_DEBUG"):
            raise
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
