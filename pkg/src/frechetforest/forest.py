"""Fréchet random forests: bagged randomized Fréchet trees aggregated by
medoid, out-of-bag error and permutation variable importance.

Randomness is derived, never shared.  Tree ``l`` draws its bag and its
per-node variable subsets from ``SeedSequence(seed, spawn_key=(l,))``; the
permutation of variable ``j`` in the OOB sample of tree ``l`` comes from
``SeedSequence(permutation_seed, spawn_key=(l, j))``.  Results therefore do
not depend on how trees are scheduled across workers.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed

from .curves import Curve, discrete_frechet
from .dataset import Dataset
from .errors import InvalidParams, NoOOBCoverage
from .metric import _medoid
from .tree import (
    CurvePool,
    Tree,
    _cache_of,
    cost_complexity_sequence,
    grow_maximal_tree,
    select_subtree,
)

__all__ = [
    "ForestParams",
    "Forest",
    "ImportanceReport",
    "OOBSummary",
    "train_forest",
    "predict_forest",
    "oob_error",
    "oob_summary",
    "variable_importance",
    "tree_stream",
    "permutation_stream",
    "worker_count",
    "FOREST_FORMAT",
]

FOREST_FORMAT = "frechet-forest"
FORMAT_VERSION = 1
WORKERS_ENV = "FRECHETFOREST_WORKERS"


def worker_count(n_jobs: int | None = None) -> int:
    """Explicit ``n_jobs`` wins, then the environment override, then 1."""
    if n_jobs is not None:
        return int(n_jobs)
    env = os.environ.get(WORKERS_ENV)
    return int(env) if env else 1


def tree_stream(seed: int, l: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(l),)))


def permutation_stream(seed: int, l: int, j: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=(int(l), int(j)))
    )


@dataclass(frozen=True)
class ForestParams:
    q: int = 100
    mtry: int = 1
    min_node_size: int = 1
    seed: int = 0
    prune_mode: str = "none"
    folds: int = 5

    def validate(self, p: int) -> None:
        if self.q < 1:
            raise InvalidParams("q must be at least 1")
        if not 1 <= self.mtry <= p:
            raise InvalidParams(f"mtry must lie in [1, {p}], got {self.mtry}")
        if self.min_node_size < 1:
            raise InvalidParams("min_node_size must be at least 1")
        if self.prune_mode not in ("none", "cv", "hubert"):
            raise InvalidParams(f"unknown prune_mode {self.prune_mode!r}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParams("seed must be a 64-bit unsigned integer")


@dataclass
class Forest:
    trees: list
    bags: list
    params: ForestParams
    variable_names: list
    n: int
    rows: np.ndarray  # dataset rows the bags were drawn from

    @property
    def p(self) -> int:
        return len(self.variable_names)

    def oob_rows(self, l: int) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.rows] = True
        mask[self.bags[l]] = False
        return np.flatnonzero(mask)

    def used_variables(self) -> set:
        out = set()
        for tree in self.trees:
            out |= tree.used_variables()
        return out

    def head(self, k: int) -> "Forest":
        """The sub-forest made of the first ``k`` trees."""
        return Forest(
            self.trees[:k], self.bags[:k], self.params, self.variable_names, self.n, self.rows
        )

    def predict_indices(self, data, rows) -> np.ndarray:
        """Dataset index of the aggregated prediction for each training-set row."""
        cache = _cache_of(data)
        rows = np.asarray(rows, dtype=np.int64)
        preds = np.stack([t.predict_indices(cache, rows) for t in self.trees])
        out = np.empty(rows.size, dtype=np.int64)
        for k in range(rows.size):
            col = np.ascontiguousarray(preds[:, k])
            pos, _ = _medoid(cache.output, col)
            out[k] = col[pos]
        return out

    def predict(self, x) -> Curve:
        return predict_forest(self, x)

    def to_dict(self) -> dict:
        pool = CurvePool()
        trees = [t.to_dict(pool) for t in self.trees]
        return {
            "format": FOREST_FORMAT,
            "version": FORMAT_VERSION,
            "n": self.n,
            "p": self.p,
            "variable_names": list(self.variable_names),
            "params": asdict(self.params),
            "rows": [int(i) for i in self.rows],
            "bags": [[int(i) for i in b] for b in self.bags],
            "curves": pool.to_list(),
            "trees": trees,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Forest":
        if doc.get("format") != FOREST_FORMAT:
            raise InvalidParams(f"not a {FOREST_FORMAT} document")
        if doc.get("version") != FORMAT_VERSION:
            raise InvalidParams(f"unsupported forest version {doc.get('version')}")
        curves = [Curve.from_dict(c) for c in doc["curves"]]
        names = doc["variable_names"]
        trees = [Tree.from_dict(t, curves, names, doc["p"]) for t in doc["trees"]]
        return cls(
            trees=trees,
            bags=[np.asarray(b, dtype=np.int64) for b in doc["bags"]],
            params=ForestParams(**doc["params"]),
            variable_names=list(names),
            n=int(doc["n"]),
            rows=np.asarray(doc["rows"], dtype=np.int64),
        )


def _grow_one(dataset: Dataset, params: ForestParams, l: int, rows: np.ndarray):
    rng = tree_stream(params.seed, l)
    bag = rows[rng.integers(0, rows.size, size=rows.size)]
    tree = grow_maximal_tree(dataset, bag, params.mtry, params.min_node_size, rng)
    if params.prune_mode != "none":
        seq = cost_complexity_sequence(tree)
        tree = select_subtree(
            dataset, seq, params.prune_mode, params.folds, rng, bag,
            params.mtry, params.min_node_size,
        )
    return bag, tree


def train_forest(
    dataset: Dataset, params: ForestParams, obs=None, n_jobs: int | None = None
) -> Forest:
    """Grow ``params.q`` trees, each on its own bootstrap bag.

    Bags are drawn from ``obs`` (dataset rows, default all of them); a bag
    holds as many draws as there are training rows.
    """
    params.validate(dataset.p)
    dataset.distances()
    rows = np.arange(dataset.n) if obs is None else np.unique(np.asarray(obs, dtype=np.int64))
    if rows.size == 0:
        raise InvalidParams("no training rows")
    jobs = worker_count(n_jobs)
    if jobs == 1:
        results = [_grow_one(dataset, params, l, rows) for l in range(params.q)]
    else:
        results = Parallel(n_jobs=jobs)(
            delayed(_grow_one)(dataset, params, l, rows) for l in range(params.q)
        )
    return Forest(
        trees=[t for _, t in results],
        bags=[b for b, _ in results],
        params=params,
        variable_names=list(dataset.variable_names),
        n=dataset.n,
        rows=rows,
    )


def predict_forest(forest: Forest, x) -> Curve:
    """Medoid of the tree predictions for ``x`` (ties go to the lowest tree index)."""
    keys, curves, counts = [], [], []
    seen = {}
    for tree in forest.trees:
        leaf = tree.apply(x)
        key = int(tree.value[leaf])
        if key not in seen:
            seen[key] = len(keys)
            keys.append(key)
            curves.append(tree.predictions[leaf])
            counts.append(0)
        counts[seen[key]] += 1
    counts = np.asarray(counts, dtype=np.float64)
    m = len(curves)
    D = np.zeros((m, m))
    for a in range(m):
        for b in range(a + 1, m):
            D[a, b] = D[b, a] = discrete_frechet(curves[a], curves[b])
    cost = (D**2) @ counts
    return curves[int(np.argmin(cost))]


@dataclass
class OOBSummary:
    error: float
    n_covered: int
    n_excluded: int
    predictions: np.ndarray  # dataset index per row, -1 when excluded


def oob_summary(forest: Forest, data) -> OOBSummary:
    cache = _cache_of(data)
    n = forest.n
    if cache.output.shape[0] != n:
        raise InvalidParams("dataset does not match the forest's training sample")
    preds = np.full((len(forest.trees), n), -1, dtype=np.int64)
    for l, tree in enumerate(forest.trees):
        rows = forest.oob_rows(l)
        if rows.size:
            preds[l, rows] = tree.predict_indices(cache, rows)
    out = np.full(n, -1, dtype=np.int64)
    total, covered = 0.0, 0
    for i in forest.rows:
        col = preds[:, i]
        col = np.ascontiguousarray(col[col >= 0])
        if col.size == 0:
            continue
        pos, _ = _medoid(cache.output, col)
        out[i] = col[pos]
        total += cache.output[out[i], i] ** 2
        covered += 1
    if covered == 0:
        raise NoOOBCoverage("every observation falls in every bag")
    return OOBSummary(total / covered, covered, forest.rows.size - covered, out)


def oob_error(forest: Forest, data) -> float:
    """Mean squared output distance between each row and its OOB prediction.

    Rows that appear in every bag are left out of the mean.
    """
    return oob_summary(forest, data).error


@dataclass
class ImportanceReport:
    scores: np.ndarray
    variable_names: list
    tree_oob_errors: np.ndarray  # NaN for trees with an empty OOB set
    skipped_trees: int = 0
    permutation_seed: int = 0

    def ranks(self) -> np.ndarray:
        order = np.argsort(-self.scores, kind="stable")
        ranks = np.empty(order.size, dtype=np.int64)
        ranks[order] = np.arange(1, order.size + 1)
        return ranks

    def rows(self) -> list:
        ranks = self.ranks()
        return [
            (name, float(score), int(rank))
            for name, score, rank in zip(self.variable_names, self.scores, ranks)
        ]


def _tree_importance(tree: Tree, cache, rows, p, permutation_seed, l):
    diffs = np.zeros(p)
    truth = cache.output
    base = float(np.mean(truth[tree.predict_indices(cache, rows), rows] ** 2))
    for j in sorted(tree.used_variables()):
        perm_rows = rows[permutation_stream(permutation_seed, l, j).permutation(rows.size)]
        pred = tree.predict_indices(cache, rows, j, perm_rows)
        diffs[j] = float(np.mean(truth[pred, rows] ** 2)) - base
    return base, diffs


def variable_importance(
    forest: Forest,
    data,
    permutation_seed: int = 0,
    n_jobs: int | None = None,
) -> ImportanceReport:
    """Mean over trees of the OOB error increase after permuting one variable.

    A variable a tree never splits on cannot change its routing, so its
    contribution for that tree is exactly zero and is not recomputed.
    """
    cache = _cache_of(data)
    p = forest.p
    if cache.output.shape[0] != forest.n:
        raise InvalidParams("dataset does not match the forest's training sample")
    tasks = []
    for l, tree in enumerate(forest.trees):
        rows = forest.oob_rows(l)
        if rows.size:
            tasks.append((l, tree, rows))
    if not tasks:
        raise NoOOBCoverage("every tree has an empty OOB set")
    jobs = worker_count(n_jobs)
    if jobs == 1:
        results = [_tree_importance(t, cache, r, p, permutation_seed, l) for l, t, r in tasks]
    else:
        results = Parallel(n_jobs=jobs)(
            delayed(_tree_importance)(t, cache, r, p, permutation_seed, l) for l, t, r in tasks
        )
    tree_err = np.full(len(forest.trees), np.nan)
    diffs = np.zeros((len(tasks), p))
    for k, ((l, _, _), (base, d)) in enumerate(zip(tasks, results)):
        tree_err[l] = base
        diffs[k] = d
    return ImportanceReport(
        scores=diffs.mean(axis=0),
        variable_names=list(forest.variable_names),
        tree_oob_errors=tree_err,
        skipped_trees=len(forest.trees) - len(tasks),
        permutation_seed=int(permutation_seed),
    )
