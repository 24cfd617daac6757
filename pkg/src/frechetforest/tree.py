"""Fréchet trees: split scoring, maximal-tree growth, cost-complexity pruning,
subtree selection and drop-down prediction.

Trees are stored as flat per-node arrays in preorder (node 0 is the root,
a left subtree precedes its right sibling).  Every node, internal or not,
keeps the medoid of its training outputs and its Fréchet variance so that
pruning only has to flip nodes into leaves.

Node centers and predictions are training curves.  They are kept both as
dataset indices (fast routing through a :class:`DistanceCache`) and as
curve objects (routing of unseen observations, serialization).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from numba import njit

from .curves import Curve, discrete_frechet
from .dataset import Dataset, DistanceCache
from .errors import (
    EmptyInput,
    InvalidParams,
    InvariantViolation,
    MissingVariable,
    NodeTooSmall,
    NoValidSplit,
    NotApplicable,
    UnsplittableVariable,
)
from .metric import DEFAULT_MAX_ITER, SplitAssignment, _medoid, _score_candidates

__all__ = [
    "SplitCandidate",
    "Tree",
    "PruneStep",
    "evaluate_split",
    "best_split",
    "grow_maximal_tree",
    "cost_complexity_sequence",
    "hubert_gamma",
    "select_subtree",
    "predict_tree",
    "fit_tree",
    "PURITY_EPSILON",
    "TREE_FORMAT",
]

PURITY_EPSILON = 1e-12
TREE_FORMAT = "frechet-tree"
FORMAT_VERSION = 1


@dataclass
class SplitCandidate:
    """A scored split of ``node_obs`` along one input variable.

    Positions in ``split`` refer to ``node_obs``.
    """

    variable: int
    split: SplitAssignment
    gain: float
    node_obs: np.ndarray
    parent_variance: float
    left_variance: float
    right_variance: float

    @property
    def left_obs(self) -> np.ndarray:
        return self.node_obs[self.split.labels == 0]

    @property
    def right_obs(self) -> np.ndarray:
        return self.node_obs[self.split.labels == 1]

    @property
    def center_left_obs(self) -> int:
        return int(self.node_obs[self.split.center_left])

    @property
    def center_right_obs(self) -> int:
        return int(self.node_obs[self.split.center_right])

    def recomputed_gain(self) -> float:
        m = len(self.node_obs)
        return (self.parent_variance - self.left_variance - self.right_variance) / m


def _cache_of(data) -> DistanceCache:
    if isinstance(data, DistanceCache):
        return data
    return data.distances()


def _node_index(node_obs) -> np.ndarray:
    idx = np.ascontiguousarray(node_obs, dtype=np.int64).reshape(-1)
    return idx


def _candidates(cache, idx, variables, max_iter, min_child):
    variables = np.ascontiguousarray(variables, dtype=np.int64)
    gains, centers, labels, parent_var = _score_candidates(
        cache.inputs, cache.output, idx, variables, max_iter, min_child
    )
    return variables, gains, centers, labels, parent_var


def _make_candidate(cache, idx, var, center_pair, labels, gain, parent_var):
    left = idx[labels == 0]
    right = idx[labels == 1]
    _, vl = _medoid(cache.output, left)
    _, vr = _medoid(cache.output, right)
    DX = cache.inputs[var]
    dl = DX[idx, idx[center_pair[0]]]
    dr = DX[idx, idx[center_pair[1]]]
    distortion = float(np.sum(np.where(labels == 0, dl, dr) ** 2))
    split = SplitAssignment(
        center_left=int(center_pair[0]),
        center_right=int(center_pair[1]),
        labels=labels.copy(),
        distortion=distortion,
        n_iter=0,
    )
    return SplitCandidate(
        variable=int(var),
        split=split,
        gain=float(gain),
        node_obs=idx,
        parent_variance=float(parent_var),
        left_variance=float(vl),
        right_variance=float(vr),
    )


def evaluate_split(data, node_obs, variable: int, max_iter: int = DEFAULT_MAX_ITER) -> SplitCandidate:
    """Two-means split of the node along ``variable`` and its variance decrease.

    ``data`` is a :class:`Dataset` or its :class:`DistanceCache`.  The gain is
    ``(V_parent - V_left - V_right) / |node|`` with medoid Fréchet means and
    squared output distances.
    """
    cache = _cache_of(data)
    idx = _node_index(node_obs)
    if idx.size < 2:
        raise NodeTooSmall(f"cannot split a node of size {idx.size}")
    vars_, gains, centers, labels, parent_var = _candidates(cache, idx, [variable], max_iter, 1)
    if np.isnan(gains[0]):
        raise UnsplittableVariable(f"variable {variable} is constant on this node")
    return _make_candidate(cache, idx, variable, centers[0], labels[0], gains[0], parent_var)


def best_split(
    data,
    node_obs,
    candidate_vars,
    min_node_size: int = 1,
    max_iter: int = DEFAULT_MAX_ITER,
) -> SplitCandidate:
    """Highest-gain split among ``candidate_vars`` (ties go to the smaller index).

    Raises :class:`NoValidSplit` when every candidate is degenerate, leaves a
    child smaller than ``min_node_size``, or would increase the variance.
    """
    cache = _cache_of(data)
    idx = _node_index(node_obs)
    if idx.size < 2:
        raise NodeTooSmall(f"cannot split a node of size {idx.size}")
    cand = np.unique(np.asarray(candidate_vars, dtype=np.int64))
    if cand.size == 0:
        raise InvalidParams("no candidate variables")
    vars_, gains, centers, labels, parent_var = _candidates(
        cache, idx, cand, max_iter, min_node_size
    )
    best = -1
    for k in range(len(vars_)):
        g = gains[k]
        if np.isnan(g) or g < 0:
            continue
        if best < 0 or g > gains[best]:
            best = k
    if best < 0:
        raise NoValidSplit("no candidate variable yields a valid split")
    return _make_candidate(cache, idx, vars_[best], centers[best], labels[best], gains[best], parent_var)


# ---------------------------------------------------------------- tree


@njit(cache=True)
def _route(feature, left, right, cl, cr, DX, rows, perm_var, perm_rows):
    out = np.empty(rows.shape[0], dtype=np.int64)
    for k in range(rows.shape[0]):
        node = 0
        while feature[node] >= 0:
            j = feature[node]
            r = perm_rows[k] if j == perm_var else rows[k]
            if DX[j, r, cl[node]] <= DX[j, r, cr[node]]:
                node = left[node]
            else:
                node = right[node]
        out[k] = node
    return out


@dataclass
class Tree:
    """Binary Fréchet tree in flat preorder layout.

    Per node: ``feature`` (-1 on leaves), child ids, center observation
    indices, ``value`` (dataset index of the medoid output), ``variance``
    (V_t, sum form), ``gain`` of the split (0 on leaves) and ``obs`` (training
    observation indices, with bootstrap repeats).
    """

    feature: np.ndarray
    left: np.ndarray
    right: np.ndarray
    center_left: np.ndarray
    center_right: np.ndarray
    value: np.ndarray
    variance: np.ndarray
    gain: np.ndarray
    obs: list
    center_curves: list
    predictions: list
    variable_names: list
    p: int

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    @property
    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    @property
    def leaf_count(self) -> int:
        return int(np.count_nonzero(self.feature < 0))

    def cost(self) -> float:
        """Sum of leaf Fréchet variances."""
        return float(self.variance[self.feature < 0].sum())

    def used_variables(self) -> set:
        return {int(j) for j in self.feature[self.feature >= 0]}

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def subtree_nodes(self, node: int) -> list:
        out, stack = [], [node]
        while stack:
            t = stack.pop()
            out.append(t)
            if self.feature[t] >= 0:
                stack.append(self.right[t])
                stack.append(self.left[t])
        return sorted(out)

    def leaf_partition(self):
        """(training obs, leaf label) pairs, one entry per bag draw."""
        obs, labels = [], []
        for k, leaf in enumerate(self.leaves):
            obs.append(self.obs[leaf])
            labels.append(np.full(len(self.obs[leaf]), k))
        return np.concatenate(obs), np.concatenate(labels)

    def prune(self, collapse) -> "Tree":
        """Copy of the tree with every node in ``collapse`` turned into a leaf."""
        collapse = set(int(c) for c in collapse)
        keep = []
        stack = [0]
        while stack:
            t = stack.pop()
            keep.append(t)
            if self.feature[t] >= 0 and t not in collapse:
                stack.append(int(self.right[t]))
                stack.append(int(self.left[t]))
        keep.sort()
        remap = {old: new for new, old in enumerate(keep)}
        ix = np.asarray(keep)
        feature = self.feature[ix].copy()
        left = np.full(ix.size, -1, dtype=np.int64)
        right = np.full(ix.size, -1, dtype=np.int64)
        cl = self.center_left[ix].copy()
        cr = self.center_right[ix].copy()
        gain = self.gain[ix].copy()
        centers = [self.center_curves[t] for t in keep]
        for new, old in enumerate(keep):
            if feature[new] >= 0 and old in collapse:
                feature[new] = -1
                cl[new] = cr[new] = -1
                gain[new] = 0.0
                centers[new] = None
            elif feature[new] >= 0:
                left[new] = remap[int(self.left[old])]
                right[new] = remap[int(self.right[old])]
        return Tree(
            feature=feature,
            left=left,
            right=right,
            center_left=cl,
            center_right=cr,
            value=self.value[ix].copy(),
            variance=self.variance[ix].copy(),
            gain=gain,
            obs=[self.obs[t] for t in keep],
            center_curves=centers,
            predictions=[self.predictions[t] for t in keep],
            variable_names=list(self.variable_names),
            p=self.p,
        )

    # --------------------------------------------------------- prediction

    def apply_indices(self, data, rows, perm_var: int = -1, perm_rows=None) -> np.ndarray:
        """Leaf reached by each dataset row, using cached distances.

        Only valid for the dataset the tree was trained on.  With
        ``perm_var`` set, variable ``perm_var`` of ``rows[k]`` is read from
        ``perm_rows[k]`` instead.
        """
        cache = _cache_of(data)
        rows = np.ascontiguousarray(rows, dtype=np.int64)
        if perm_rows is None:
            perm_rows = rows
        perm_rows = np.ascontiguousarray(perm_rows, dtype=np.int64)
        return _route(
            self.feature, self.left, self.right, self.center_left, self.center_right,
            cache.inputs, rows, int(perm_var), perm_rows,
        )

    def predict_indices(self, data, rows, perm_var: int = -1, perm_rows=None) -> np.ndarray:
        """Dataset index of the predicted output curve for each row."""
        return self.value[self.apply_indices(data, rows, perm_var, perm_rows)]

    def apply(self, x) -> int:
        node = 0
        while self.feature[node] >= 0:
            j = int(self.feature[node])
            curve = _lookup(x, j, self.variable_names)
            c_left, c_right = self.center_curves[node]
            if discrete_frechet(curve, c_left) <= discrete_frechet(curve, c_right):
                node = int(self.left[node])
            else:
                node = int(self.right[node])
        return node

    def predict(self, x) -> Curve:
        return self.predictions[self.apply(x)]

    # ------------------------------------------------------ serialization

    def to_dict(self, pool: "CurvePool | None" = None) -> dict:
        standalone = pool is None
        if standalone:
            pool = CurvePool()
        nodes = []
        for t in range(self.n_nodes):
            rec = {
                "id": t,
                "n_obs": len(self.obs[t]),
                "obs": [int(i) for i in self.obs[t]],
                "variance": float(self.variance[t]),
                "prediction": {
                    "obs": int(self.value[t]),
                    "curve": pool.add(("y", int(self.value[t])), self.predictions[t]),
                },
            }
            if self.feature[t] >= 0:
                j = int(self.feature[t])
                c_left, c_right = self.center_curves[t]
                rec.update(
                    variable=j,
                    gain=float(self.gain[t]),
                    left=int(self.left[t]),
                    right=int(self.right[t]),
                    center_left={
                        "obs": int(self.center_left[t]),
                        "curve": pool.add(("x", j, int(self.center_left[t])), c_left),
                    },
                    center_right={
                        "obs": int(self.center_right[t]),
                        "curve": pool.add(("x", j, int(self.center_right[t])), c_right),
                    },
                )
            nodes.append(rec)
        doc = {"nodes": nodes}
        if standalone:
            doc = {
                "format": TREE_FORMAT,
                "version": FORMAT_VERSION,
                "p": self.p,
                "variable_names": list(self.variable_names),
                "curves": pool.to_list(),
                "nodes": nodes,
            }
        return doc

    @classmethod
    def from_dict(cls, doc: dict, curves=None, variable_names=None, p=None) -> "Tree":
        if curves is None:
            if doc.get("format") != TREE_FORMAT:
                raise InvalidParams(f"not a {TREE_FORMAT} document")
            if doc.get("version") != FORMAT_VERSION:
                raise InvalidParams(f"unsupported tree version {doc.get('version')}")
            curves = [Curve.from_dict(c) for c in doc["curves"]]
            variable_names = doc["variable_names"]
            p = doc["p"]
        nodes = doc["nodes"]
        k = len(nodes)
        feature = np.full(k, -1, dtype=np.int64)
        left = np.full(k, -1, dtype=np.int64)
        right = np.full(k, -1, dtype=np.int64)
        cl = np.full(k, -1, dtype=np.int64)
        cr = np.full(k, -1, dtype=np.int64)
        value = np.zeros(k, dtype=np.int64)
        variance = np.zeros(k)
        gain = np.zeros(k)
        obs, centers, preds = [], [], []
        for t, rec in enumerate(nodes):
            if rec["id"] != t:
                raise InvalidParams("tree nodes must be listed in id order")
            value[t] = rec["prediction"]["obs"]
            variance[t] = rec["variance"]
            obs.append(np.asarray(rec["obs"], dtype=np.int64))
            preds.append(curves[rec["prediction"]["curve"]])
            if "variable" in rec:
                feature[t] = rec["variable"]
                left[t], right[t] = rec["left"], rec["right"]
                gain[t] = rec["gain"]
                cl[t] = rec["center_left"]["obs"]
                cr[t] = rec["center_right"]["obs"]
                centers.append(
                    (curves[rec["center_left"]["curve"]], curves[rec["center_right"]["curve"]])
                )
            else:
                centers.append(None)
        return cls(feature, left, right, cl, cr, value, variance, gain, obs, centers, preds,
                   list(variable_names), int(p))


class CurvePool:
    """Deduplicating curve table used by the JSON model documents."""

    def __init__(self):
        self._ids = {}
        self._curves = []

    def add(self, key, curve: Curve) -> int:
        if key not in self._ids:
            self._ids[key] = len(self._curves)
            self._curves.append(curve)
        return self._ids[key]

    def to_list(self) -> list:
        return [c.to_dict() for c in self._curves]


def _lookup(x, j: int, names: Sequence[str]) -> Curve:
    if isinstance(x, Mapping):
        if names[j] in x:
            return x[names[j]]
        if j in x:
            return x[j]
        raise MissingVariable(f"variable {names[j]!r} is required for prediction")
    try:
        curve = x[j]
    except IndexError:
        raise MissingVariable(f"variable {names[j]!r} is required for prediction") from None
    if curve is None:
        raise MissingVariable(f"variable {names[j]!r} is required for prediction")
    return curve


def predict_tree(tree: Tree, x) -> Curve:
    """Drop ``x`` (mapping name/index -> Curve, or a sequence) down the tree."""
    return tree.predict(x)


# ---------------------------------------------------------------- growth


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def grow_maximal_tree(
    dataset: Dataset,
    obs=None,
    mtry: int | None = None,
    min_node_size: int = 1,
    rng=None,
    purity_epsilon: float = PURITY_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
    widen: bool = True,
) -> Tree:
    """Grow a tree until nodes are pure, too small or unsplittable.

    ``obs`` lists dataset rows (repeats allowed) and defaults to all rows.
    ``mtry`` variables are drawn without replacement from ``rng`` at every
    node; ``mtry=None`` uses all ``p`` variables.  When none of the drawn
    variables gives a non-negative gain and ``widen`` is set, the remaining
    variables are searched before the node is declared a leaf.
    """
    cache = dataset.distances()
    p = dataset.p
    if obs is None:
        obs = np.arange(dataset.n)
    obs = _node_index(obs)
    if obs.size == 0:
        raise EmptyInput("cannot grow a tree on zero observations")
    if mtry is None:
        mtry = p
    if not 1 <= mtry <= p:
        raise InvalidParams(f"mtry must lie in [1, {p}], got {mtry}")
    if min_node_size < 1:
        raise InvalidParams("min_node_size must be at least 1")
    rng = _as_rng(rng)

    nodes = []  # dicts, preorder

    def build(idx):
        t = len(nodes)
        pos, var = _medoid(cache.output, idx)
        rec = {"obs": idx, "value": int(idx[pos]), "variance": float(var),
               "feature": -1, "left": -1, "right": -1, "cl": -1, "cr": -1, "gain": 0.0}
        nodes.append(rec)
        if var <= purity_epsilon or idx.size < 2 * min_node_size:
            return t
        cand = rng.choice(p, size=mtry, replace=False)
        try:
            split = best_split(cache, idx, cand, min_node_size, max_iter)
        except NoValidSplit:
            # medoid means can make every drawn variable lose variance;
            # widen the search to the undrawn ones before giving up
            rest = np.setdiff1d(np.arange(p), cand)
            if rest.size == 0 or not widen:
                return t
            try:
                split = best_split(cache, idx, rest, min_node_size, max_iter)
            except NoValidSplit:
                return t
        rec.update(feature=split.variable, gain=split.gain,
                   cl=split.center_left_obs, cr=split.center_right_obs)
        rec["left"] = build(split.left_obs)
        rec["right"] = build(split.right_obs)
        return t

    build(obs)
    return _assemble(nodes, dataset)


def _assemble(nodes, dataset: Dataset) -> Tree:
    feature = np.array([r["feature"] for r in nodes], dtype=np.int64)
    cl = np.array([r["cl"] for r in nodes], dtype=np.int64)
    cr = np.array([r["cr"] for r in nodes], dtype=np.int64)
    value = np.array([r["value"] for r in nodes], dtype=np.int64)
    centers = [
        (dataset.inputs[f][a], dataset.inputs[f][b]) if f >= 0 else None
        for f, a, b in zip(feature, cl, cr)
    ]
    return Tree(
        feature=feature,
        left=np.array([r["left"] for r in nodes], dtype=np.int64),
        right=np.array([r["right"] for r in nodes], dtype=np.int64),
        center_left=cl,
        center_right=cr,
        value=value,
        variance=np.array([r["variance"] for r in nodes]),
        gain=np.array([r["gain"] for r in nodes]),
        obs=[r["obs"] for r in nodes],
        center_curves=centers,
        predictions=[dataset.outputs[v] for v in value],
        variable_names=list(dataset.variable_names),
        p=dataset.p,
    )


# ---------------------------------------------------------------- pruning


@dataclass
class PruneStep:
    subtree: Tree
    alpha: float
    leaf_count: int
    cost: float
    hubert_gamma: float | None = None
    cv_error: float | None = None


def _weakest_links(tree: Tree):
    """Per internal node: (R(t) - R(T_t)) / (|leaves(T_t)| - 1)."""
    k = tree.n_nodes
    leaf_cost = np.zeros(k)
    leaf_num = np.zeros(k, dtype=np.int64)
    for t in range(k - 1, -1, -1):  # children follow parents in preorder
        if tree.feature[t] < 0:
            leaf_cost[t] = tree.variance[t]
            leaf_num[t] = 1
        else:
            leaf_cost[t] = leaf_cost[tree.left[t]] + leaf_cost[tree.right[t]]
            leaf_num[t] = leaf_num[tree.left[t]] + leaf_num[tree.right[t]]
    internal = np.flatnonzero(tree.feature >= 0)
    g = (tree.variance[internal] - leaf_cost[internal]) / (leaf_num[internal] - 1)
    return internal, g


def cost_complexity_sequence(tree: Tree) -> list:
    """Weakest-link pruning sequence from ``tree`` down to its root.

    Cost is the sum of leaf Fréchet variances; each step collapses every
    internal node whose per-leaf cost increase equals the current minimum.
    """
    steps = [PruneStep(tree, 0.0, tree.leaf_count, tree.cost())]
    current = tree
    alpha = 0.0
    while current.leaf_count > 1:
        internal, g = _weakest_links(current)
        g_min = float(g.min())
        tol = 1e-12 * max(1.0, abs(g_min))
        collapse = internal[g <= g_min + tol]
        alpha = max(alpha, g_min)
        current = current.prune(collapse)
        steps.append(PruneStep(current, alpha, current.leaf_count, current.cost()))
    return steps


def hubert_gamma(data, obs, labels) -> float:
    """Normalized Hubert statistic of a partition of training outputs.

    Pearson correlation, over pairs ``i < j``, between the output distance
    and the indicator that ``i`` and ``j`` sit in different classes.
    """
    cache = _cache_of(data)
    obs = _node_index(obs)
    labels = np.asarray(labels)
    if obs.size != labels.size:
        raise InvalidParams("one label per observation required")
    if np.unique(labels).size < 2:
        raise NotApplicable("Hubert's statistic needs at least two classes")
    iu, ju = np.triu_indices(obs.size, 1)
    dist = cache.output[obs[iu], obs[ju]]
    between = (labels[iu] != labels[ju]).astype(np.float64)
    if np.ptp(dist) == 0 or np.ptp(between) == 0:
        raise NotApplicable("zero variance in a pair vector")
    return float(np.corrcoef(dist, between)[0, 1])


def _subtree_for(sequence, alpha: float) -> int:
    """Index of the step that is optimal at complexity ``alpha``."""
    k = 0
    for i, step in enumerate(sequence):
        if step.alpha <= alpha:
            k = i
    return k


def _cv_alphas(sequence) -> list:
    alphas = [s.alpha for s in sequence]
    mids = [math.sqrt(a * b) for a, b in zip(alphas[:-1], alphas[1:])]
    mids.append(alphas[-1])
    return mids


def select_subtree(
    dataset: Dataset,
    sequence: list,
    mode: str = "cv",
    folds: int = 5,
    rng=None,
    obs=None,
    mtry: int | None = None,
    min_node_size: int = 1,
) -> Tree:
    """Pick the final subtree from a pruning sequence.

    ``mode="cv"`` regrows and prunes a tree on each fold and keeps the
    complexity with the lowest held-out mean squared output distance (ties
    favour the smaller tree).  ``mode="hubert"`` keeps the subtree whose leaf
    partition maximises Hubert's statistic (ties favour fewer leaves).
    ``obs``/``mtry``/``min_node_size`` must match how the full tree was
    grown.  Scores are written back into ``sequence``.
    """
    if not sequence:
        raise InvalidParams("empty pruning sequence")
    if len(sequence) == 1:
        return sequence[0].subtree
    if mode == "hubert":
        best = None
        for k, step in enumerate(sequence):
            o, lab = step.subtree.leaf_partition()
            try:
                step.hubert_gamma = hubert_gamma(dataset, o, lab)
            except NotApplicable:
                continue
            if best is None or step.hubert_gamma > sequence[best].hubert_gamma or (
                step.hubert_gamma == sequence[best].hubert_gamma
                and step.leaf_count < sequence[best].leaf_count
            ):
                best = k
        if best is None:
            warnings.warn("Hubert selection not applicable; keeping the maximal tree")
            return sequence[0].subtree
        return sequence[best].subtree
    if mode != "cv":
        raise InvalidParams(f"unknown selection mode {mode!r}")

    cache = dataset.distances()
    rng = _as_rng(rng)
    if obs is None:
        obs = np.arange(dataset.n)
    obs = _node_index(obs)
    if not 2 <= folds <= obs.size:
        raise InvalidParams(f"folds must lie in [2, {obs.size}]")
    alphas = _cv_alphas(sequence)
    fold_of = np.empty(obs.size, dtype=np.int64)
    fold_of[rng.permutation(obs.size)] = np.arange(obs.size) % folds
    sq_err = np.zeros(len(alphas))
    for f in range(folds):
        train, test = obs[fold_of != f], obs[fold_of == f]
        fold_tree = grow_maximal_tree(dataset, train, mtry, min_node_size, rng)
        fold_seq = cost_complexity_sequence(fold_tree)
        for k, a in enumerate(alphas):
            sub = fold_seq[_subtree_for(fold_seq, a)].subtree
            pred = sub.predict_indices(cache, test)
            sq_err[k] += np.sum(cache.output[pred, test] ** 2)
    cv = sq_err / obs.size
    for step, err in zip(sequence, cv):
        step.cv_error = float(err)
    best = 0
    for k in range(1, len(cv)):
        if cv[k] <= cv[best]:
            best = k
    return sequence[best].subtree


def fit_tree(
    dataset: Dataset,
    obs=None,
    select: str | None = "cv",
    folds: int = 5,
    seed=0,
    mtry: int | None = None,
    min_node_size: int = 1,
) -> Tree:
    """Grow a maximal tree, prune it, and select a subtree (``select=None`` skips pruning)."""
    rng = _as_rng(seed)
    tree = grow_maximal_tree(dataset, obs, mtry, min_node_size, rng)
    if select is None:
        return tree
    sequence = cost_complexity_sequence(tree)
    return select_subtree(dataset, sequence, select, folds, rng, obs, mtry, min_node_size)


def check_tree(tree: Tree) -> None:
    """Raise :class:`InvariantViolation` if the structural invariants fail."""
    for t in range(tree.n_nodes):
        if tree.variance[t] < 0:
            raise InvariantViolation(f"negative variance at node {t}")
        if tree.feature[t] >= 0:
            if tree.gain[t] < 0:
                raise InvariantViolation(f"negative gain at node {t}")
            a, b = tree.obs[tree.left[t]], tree.obs[tree.right[t]]
            if a.size == 0 or b.size == 0:
                raise InvariantViolation(f"empty child at node {t}")
            if not np.array_equal(np.sort(np.concatenate([a, b])), np.sort(tree.obs[t])):
                raise InvariantViolation(f"children do not partition node {t}")
