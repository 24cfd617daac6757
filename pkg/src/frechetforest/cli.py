"""Command-line entry point: ``frechetforest <subcommand> ...``.

Exit codes: 0 on success, 2 on invalid input, 3 when an internal
invariant check fails.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from . import io
from .benchmark import run_benchmark
from .errors import FrechetError, InputError, InvariantViolation
from .forest import (
    Forest,
    ForestParams,
    oob_summary,
    predict_forest,
    train_forest,
    variable_importance,
)
from .simulate import SimConfig, simulate_dataset
from .tree import check_tree, cost_complexity_sequence, fit_tree, grow_maximal_tree, select_subtree


def _variables(arg):
    return [v.strip() for v in arg.split(",") if v.strip()] if arg else None


def _load_training(args):
    return io.load_dataset(args.data, _variables(args.variables))


def cmd_simulate(args):
    config = SimConfig(
        n=args.n,
        noise_vars=args.noise_vars,
        x_grid_size=args.x_grid,
        y_grid_size=args.y_grid,
        seed=args.seed,
    )
    dataset, truth = simulate_dataset(config)
    io.write_dataset(dataset, args.out)
    if args.truth:
        io.write_truth(dataset.obs_ids, truth, args.truth)
    print(f"wrote {dataset.n} observations x {dataset.p} variables to {args.out}")


def cmd_train(args):
    dataset = _load_training(args)
    if args.mode == "tree":
        model = fit_tree(
            dataset,
            select=None if args.select == "none" else args.select,
            folds=args.folds,
            seed=args.seed,
            min_node_size=args.min_node_size,
        )
        check_tree(model)
        print(f"tree: {model.leaf_count} leaves, depth {model.depth()}")
    else:
        mtry = args.mtry if args.mtry is not None else max(1, dataset.p // 3)
        params = ForestParams(
            q=args.trees,
            mtry=mtry,
            min_node_size=args.min_node_size,
            seed=args.seed,
            prune_mode=args.prune,
            folds=args.folds,
        )
        model = train_forest(dataset, params, n_jobs=args.jobs)
        for tree in model.trees:
            check_tree(tree)
        print(f"forest: {len(model.trees)} trees, mtry={mtry}")
    io.save_model(model, args.out)


def cmd_predict(args):
    model = io.load_model(args.model)
    obs_ids, rows = io.load_inputs(args.data)
    if isinstance(model, Forest):
        curves = [predict_forest(model, x) for x in rows]
    else:
        curves = [model.predict(x) for x in rows]
    io.write_curves(obs_ids, curves, args.out)
    print(f"wrote {len(curves)} predicted curves to {args.out}")


def _require_forest(model):
    if not isinstance(model, Forest):
        raise InputError("OOB quantities need a forest model")
    return model


def cmd_oob(args):
    forest = _require_forest(io.load_model(args.model))
    dataset = _load_training(args)
    summary = oob_summary(forest, dataset)
    print(f"OOB error {summary.error:.6g} over {summary.n_covered} rows "
          f"({summary.n_excluded} excluded)")
    if args.out:
        truth = dataset.distances().output
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["obs_id", "oob_prediction", "squared_error"])
            for i in forest.rows:
                pred = summary.predictions[i]
                if pred < 0:
                    w.writerow([dataset.obs_ids[i], "", ""])
                else:
                    w.writerow([dataset.obs_ids[i], dataset.obs_ids[pred],
                                repr(float(truth[pred, i] ** 2))])


def cmd_importance(args):
    forest = _require_forest(io.load_model(args.model))
    dataset = _load_training(args)
    if dataset.variable_names != forest.variable_names:
        raise InputError("dataset variables differ from the model's")
    report = variable_importance(forest, dataset, args.permutation_seed, n_jobs=args.jobs)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variable_name", "importance", "rank"])
        for name, score, rank in report.rows():
            w.writerow([name, repr(score), rank])
    top = sorted(report.rows(), key=lambda r: r[2])[:10]
    for name, score, rank in top:
        print(f"{rank:4d}  {name:20s} {score: .6g}")
    if report.skipped_trees:
        print(f"{report.skipped_trees} trees skipped (empty OOB set)")


def cmd_benchmark(args):
    dataset = _load_training(args)
    mtry = args.mtry if args.mtry is not None else max(1, dataset.p // 3)
    params = ForestParams(q=args.trees, mtry=mtry, min_node_size=args.min_node_size, seed=args.seed)
    report = run_benchmark(
        dataset,
        reps=args.reps,
        test_fraction=args.test_fraction,
        params=params,
        tree_select=args.select,
        seed=args.seed,
        folds=args.folds,
        n_jobs=args.jobs,
    )
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rep", "tree_error", "forest_error", "tree_leaves"])
            for k in range(report.reps):
                w.writerow([k, repr(float(report.tree_errors[k])),
                            repr(float(report.forest_errors[k])), int(report.tree_leaves[k])])
    print(report.summary())


def cmd_prune_info(args):
    dataset = _load_training(args)
    rng = np.random.default_rng(args.seed)
    tree = grow_maximal_tree(dataset, min_node_size=args.min_node_size, rng=rng)
    seq = cost_complexity_sequence(tree)
    select_subtree(dataset, seq, "hubert")
    select_subtree(dataset, seq, "cv", args.folds, rng, min_node_size=args.min_node_size)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["alpha", "leaves", "gamma", "cv_error"])
        for s in seq:
            w.writerow([
                repr(float(s.alpha)),
                s.leaf_count,
                "" if s.hubert_gamma is None else repr(s.hubert_gamma),
                "" if s.cv_error is None else repr(s.cv_error),
            ])
    finally:
        if out is not sys.stdout:
            out.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frechetforest",
        description="Fréchet trees and random forests for curve-valued regression.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p):
        p.add_argument("--data", required=True, help="long-format CSV (obs_id,var_name,time,value)")
        p.add_argument("--variables", help="comma-separated input variables, in order")

    def seed_arg(p, name="--seed"):
        p.add_argument(name, type=int, required=True)

    def jobs_arg(p):
        p.add_argument("--jobs", type=int, default=None,
                       help="worker processes (default: $FRECHETFOREST_WORKERS or 1)")

    p = sub.add_parser("simulate", help="write a simulated dataset")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--noise-vars", type=int, default=0)
    p.add_argument("--x-grid", type=int, default=51)
    p.add_argument("--y-grid", type=int, default=46)
    seed_arg(p)
    p.add_argument("--out", required=True)
    p.add_argument("--truth")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a tree or a forest")
    data_args(p)
    p.add_argument("--mode", choices=["tree", "forest"], default="forest")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--mtry", type=int, default=None, help="default: max(1, p // 3)")
    p.add_argument("--min-node-size", type=int, default=1)
    p.add_argument("--select", choices=["cv", "hubert", "none"], default="cv",
                   help="subtree selection in tree mode")
    p.add_argument("--prune", choices=["none", "cv", "hubert"], default="none",
                   help="per-tree pruning in forest mode")
    p.add_argument("--folds", type=int, default=5)
    seed_arg(p)
    jobs_arg(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict output curves")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("oob", help="out-of-bag error of a forest")
    p.add_argument("--model", required=True)
    data_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oob)

    p = sub.add_parser("importance", help="permutation variable importance")
    p.add_argument("--model", required=True)
    data_args(p)
    seed_arg(p, "--permutation-seed")
    jobs_arg(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("benchmark", help="repeated train/test cuts, tree vs forest")
    data_args(p)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--test-fraction", type=float, default=0.2)
    p.add_argument("--trees", type=int, default=200)
    p.add_argument("--mtry", type=int, default=None)
    p.add_argument("--min-node-size", type=int, default=1)
    p.add_argument("--select", choices=["cv", "hubert"], default="hubert")
    p.add_argument("--folds", type=int, default=5)
    seed_arg(p)
    jobs_arg(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("prune-info", help="cost-complexity sequence with selection scores")
    data_args(p)
    p.add_argument("--min-node-size", type=int, default=1)
    p.add_argument("--folds", type=int, default=5)
    seed_arg(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_prune_info)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except InvariantViolation as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return 3
    except (FrechetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
