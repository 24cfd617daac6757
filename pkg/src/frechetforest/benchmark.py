"""Repeated random train/test cuts comparing a pruned Fréchet tree with a
Fréchet random forest, plus the OOB error of one forest fitted on all rows."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed

from .dataset import Dataset
from .errors import InvalidFraction, InvalidParams
from .forest import ForestParams, oob_summary, train_forest, worker_count
from .tree import check_tree, fit_tree

__all__ = ["BenchmarkReport", "run_benchmark", "split_rows"]


@dataclass
class BenchmarkReport:
    tree_errors: np.ndarray
    forest_errors: np.ndarray
    tree_leaves: np.ndarray
    n_splits: int  # accepted splits checked across every tree grown
    min_gain: float
    oob_error: float
    oob_excluded: int
    test_fraction: float
    tree_select: str
    params: ForestParams
    seconds: float

    @property
    def reps(self) -> int:
        return int(self.tree_errors.size)

    @property
    def tree_mean(self) -> float:
        return float(self.tree_errors.mean())

    @property
    def forest_mean(self) -> float:
        return float(self.forest_errors.mean())

    @property
    def tree_sd(self) -> float:
        return float(self.tree_errors.std(ddof=1)) if self.reps > 1 else 0.0

    @property
    def forest_sd(self) -> float:
        return float(self.forest_errors.std(ddof=1)) if self.reps > 1 else 0.0

    @property
    def forest_wins(self) -> int:
        return int(np.sum(self.forest_errors < self.tree_errors))

    def summary(self) -> str:
        return "\n".join([
            f"repetitions      {self.reps} (test fraction {self.test_fraction:g})",
            f"tree ({self.tree_select:6s})    mean {self.tree_mean:.4f}  sd {self.tree_sd:.4f}",
            f"forest (q={self.params.q:<4d})  mean {self.forest_mean:.4f}  sd {self.forest_sd:.4f}",
            f"forest wins      {self.forest_wins}/{self.reps}",
            f"full-data OOB    {self.oob_error:.4f} ({self.oob_excluded} rows never out of bag)",
            f"splits checked   {self.n_splits} (min gain {self.min_gain:.3g})",
            f"wall clock       {self.seconds:.1f} s",
        ])


def split_rows(n: int, test_fraction: float, rng) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < test_fraction < 1:
        raise InvalidFraction("test fraction must lie strictly between 0 and 1")
    n_test = int(round(test_fraction * n))
    if n_test < 1 or n_test >= n:
        raise InvalidFraction(f"test fraction {test_fraction} leaves an empty side for n={n}")
    perm = rng.permutation(n)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def _split_stats(trees):
    gains = [t.gain[t.feature >= 0] for t in trees]
    gains = np.concatenate(gains) if gains else np.empty(0)
    return gains.size, float(gains.min()) if gains.size else np.inf


def _one_rep(dataset, rep, seed, test_fraction, params, tree_select, folds):
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(rep,)))
    train, test = split_rows(dataset.n, test_fraction, rng)
    truth = dataset.distances().output
    tree = fit_tree(dataset, train, tree_select, folds, rng, None, params.min_node_size)
    check_tree(tree)
    tree_err = float(np.mean(truth[tree.predict_indices(dataset, test), test] ** 2))
    rep_params = replace(params, seed=int(rng.integers(2**63)))
    forest = train_forest(dataset, rep_params, train, n_jobs=1)
    for t in forest.trees:
        check_tree(t)
    forest_err = float(np.mean(truth[forest.predict_indices(dataset, test), test] ** 2))
    n_splits, min_gain = _split_stats([tree] + forest.trees)
    return tree_err, forest_err, tree.leaf_count, n_splits, min_gain


def run_benchmark(
    dataset: Dataset,
    reps: int = 100,
    test_fraction: float = 0.2,
    params: ForestParams | None = None,
    tree_select: str = "hubert",
    seed: int = 0,
    folds: int = 5,
    n_jobs: int | None = None,
) -> BenchmarkReport:
    """Mean squared output distance on held-out rows over ``reps`` random cuts."""
    if reps < 1:
        raise InvalidParams("reps must be at least 1")
    params = params or ForestParams()
    params.validate(dataset.p)
    if tree_select not in ("cv", "hubert"):
        raise InvalidParams(f"unknown tree selection {tree_select!r}")
    split_rows(dataset.n, test_fraction, np.random.default_rng(0))
    start = time.perf_counter()
    dataset.distances()
    jobs = worker_count(n_jobs)
    args = (seed, test_fraction, params, tree_select, folds)
    if jobs == 1:
        results = [_one_rep(dataset, r, *args) for r in range(reps)]
    else:
        results = Parallel(n_jobs=jobs)(delayed(_one_rep)(dataset, r, *args) for r in range(reps))
    full = train_forest(dataset, params, n_jobs=jobs)
    for t in full.trees:
        check_tree(t)
    oob = oob_summary(full, dataset)
    res = np.asarray(results)
    full_splits, full_min = _split_stats(full.trees)
    return BenchmarkReport(
        tree_errors=res[:, 0],
        forest_errors=res[:, 1],
        tree_leaves=res[:, 2].astype(np.int64),
        n_splits=int(res[:, 3].sum()) + full_splits,
        min_gain=min(float(res[:, 4].min()), full_min),
        oob_error=oob.error,
        oob_excluded=oob.n_excluded,
        test_fraction=test_fraction,
        tree_select=tree_select,
        params=params,
        seconds=time.perf_counter() - start,
    )
