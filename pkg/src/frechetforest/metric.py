"""Metric-space primitives: medoid Fréchet means, Fréchet variance and the
two-means (k-medoids, k=2) split function.

Everything here works on a square distance matrix.  Node-level code passes
the full-dataset matrix plus an index array (possibly with repeats, as in a
bootstrap bag) so that no sub-matrix has to be materialised.

Tie rules are fixed throughout: the smaller position wins a medoid tie and
an item equidistant from both centers goes left.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
from numba import njit

from .errors import DegenerateSpace, EmptyInput, TooFewItems

__all__ = [
    "MetricItems",
    "SplitAssignment",
    "frechet_medoid",
    "frechet_variance",
    "two_means_split",
    "DEFAULT_MAX_ITER",
]

DEFAULT_MAX_ITER = 50

LEFT = 0
RIGHT = 1


@dataclass(frozen=True)
class MetricItems:
    """Ordered elements of one metric space and the distance between them."""

    items: Sequence[Any]
    dist: Callable[[Any, Any], float]

    def __len__(self):
        return len(self.items)

    def matrix(self) -> np.ndarray:
        n = len(self.items)
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                out[i, j] = out[j, i] = self.dist(self.items[i], self.items[j])
        return out


@dataclass(frozen=True)
class SplitAssignment:
    """Result of a two-means split, positions relative to the input items.

    ``labels`` holds 0 for left and 1 for right.  ``history`` is the
    distortion after the initial assignment and after every accepted
    iteration.
    """

    center_left: int
    center_right: int
    labels: np.ndarray
    distortion: float
    n_iter: int
    history: tuple = ()

    @property
    def left(self) -> np.ndarray:
        return np.flatnonzero(self.labels == LEFT)

    @property
    def right(self) -> np.ndarray:
        return np.flatnonzero(self.labels == RIGHT)


def _as_matrix(items) -> np.ndarray:
    if isinstance(items, MetricItems):
        return items.matrix()
    mat = np.asarray(items, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("expected MetricItems or a square distance matrix")
    return mat


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def _medoid(D, idx):
    m = idx.shape[0]
    best = 0
    best_cost = np.inf
    for a in range(m):
        ia = idx[a]
        cost = 0.0
        for b in range(m):
            d = D[ia, idx[b]]
            cost += d * d
        if cost < best_cost:
            best_cost = cost
            best = a
    return best, best_cost


@njit(cache=True)
def _class_medoid(D, idx, labels, which):
    m = idx.shape[0]
    best = -1
    best_cost = np.inf
    for a in range(m):
        if labels[a] != which:
            continue
        ia = idx[a]
        cost = 0.0
        for b in range(m):
            if labels[b] == which:
                d = D[ia, idx[b]]
                cost += d * d
        if cost < best_cost:
            best_cost = cost
            best = a
    return best, best_cost


@njit(cache=True)
def _assign(D, idx, cl, cr, labels):
    m = idx.shape[0]
    il = idx[cl]
    ir = idx[cr]
    distortion = 0.0
    n_right = 0
    for a in range(m):
        dl = D[idx[a], il]
        dr = D[idx[a], ir]
        if dl <= dr:
            labels[a] = 0
            distortion += dl * dl
        else:
            labels[a] = 1
            distortion += dr * dr
            n_right += 1
    return distortion, n_right


@njit(cache=True)
def _two_means(D, idx, max_iter, history):
    # status 1: every pairwise distance is zero
    # history[:n_hist] receives the distortion trace
    m = idx.shape[0]
    # farthest pair, lexicographically smallest on ties
    cl = 0
    cr = 0
    far = -1.0
    for a in range(m):
        for b in range(a + 1, m):
            d = D[idx[a], idx[b]]
            if d > far:
                far = d
                cl = a
                cr = b
    labels = np.zeros(m, dtype=np.int8)
    if far <= 0.0:
        return 1, cl, cr, 0.0, 0, 0, labels
    distortion, n_right = _assign(D, idx, cl, cr, labels)
    history[0] = distortion
    n_hist = 1
    new_labels = np.empty(m, dtype=np.int8)
    n_iter = 0
    for it in range(max_iter):
        n_iter = it + 1
        ncl, _ = _class_medoid(D, idx, labels, 0)
        ncr, _ = _class_medoid(D, idx, labels, 1)
        new_dist, new_right = _assign(D, idx, ncl, ncr, new_labels)
        if new_right == 0 or new_right == m:
            break
        cl = ncl
        cr = ncr
        changed = False
        for a in range(m):
            if new_labels[a] != labels[a]:
                changed = True
            labels[a] = new_labels[a]
        distortion = new_dist
        history[n_hist] = distortion
        n_hist += 1
        if not changed:
            break
    return 0, cl, cr, distortion, n_iter, n_hist, labels


@njit(cache=True)
def _sse(D, idx, labels, which, center):
    total = 0.0
    ic = idx[center]
    for a in range(idx.shape[0]):
        if labels[a] == which:
            d = D[idx[a], ic]
            total += d * d
    return total


@njit(cache=True)
def _score_candidates(DX, DY, idx, cand, max_iter, min_child):
    """Two-means + variance decrease for each candidate variable.

    gains[k] is NaN when variable cand[k] is degenerate on the node or a
    child falls below ``min_child``.
    """
    m = idx.shape[0]
    k = cand.shape[0]
    gains = np.full(k, np.nan)
    centers = np.zeros((k, 2), dtype=np.int64)
    out_labels = np.zeros((k, m), dtype=np.int8)
    history = np.empty(max_iter + 1)
    _, parent_var = _medoid(DY, idx)
    for c in range(k):
        status, cl, cr, _, _, _, labels = _two_means(DX[cand[c]], idx, max_iter, history)
        if status != 0:
            continue
        n_right = 0
        for a in range(m):
            n_right += labels[a]
        if n_right < min_child or m - n_right < min_child:
            continue
        _, vl = _class_medoid(DY, idx, labels, 0)
        _, vr = _class_medoid(DY, idx, labels, 1)
        gains[c] = (parent_var - vl - vr) / m
        centers[c, 0] = cl
        centers[c, 1] = cr
        out_labels[c] = labels
    return gains, centers, out_labels, parent_var


# ---------------------------------------------------------------- public API


def frechet_medoid(items) -> int:
    """Index of the item minimising the sum of squared distances to all others.

    This is the empirical Fréchet mean restricted to the observed items.
    """
    D = _as_matrix(items)
    if D.shape[0] == 0:
        raise EmptyInput("medoid of an empty collection")
    pos, _ = _medoid(D, np.arange(D.shape[0]))
    return int(pos)


def frechet_variance(items) -> float:
    """Sum (not mean) of squared distances to the medoid Fréchet mean."""
    D = _as_matrix(items)
    if D.shape[0] == 0:
        raise EmptyInput("variance of an empty collection")
    _, cost = _medoid(D, np.arange(D.shape[0]))
    return float(cost)


def two_means_split(items, max_iter: int = DEFAULT_MAX_ITER) -> SplitAssignment:
    """Split items into two Voronoi cells with medoid centers.

    Starts from the farthest pair and alternates assignment and medoid
    updates until the labels stop changing or ``max_iter`` is reached.
    """
    D = _as_matrix(items)
    return _two_means_on(D, np.arange(D.shape[0]), max_iter)


def _two_means_on(D, idx, max_iter=DEFAULT_MAX_ITER) -> SplitAssignment:
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    if idx.shape[0] < 2:
        raise TooFewItems("two-means needs at least two items")
    history = np.empty(max_iter + 1)
    status, cl, cr, distortion, n_iter, n_hist, labels = _two_means(
        D, np.ascontiguousarray(idx, dtype=np.int64), max_iter, history
    )
    if status != 0:
        raise DegenerateSpace("all pairwise distances are zero")
    return SplitAssignment(
        center_left=int(cl),
        center_right=int(cr),
        labels=labels,
        distortion=float(distortion),
        n_iter=int(n_iter),
        history=tuple(history[:n_hist].tolist()),
    )
