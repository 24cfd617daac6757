import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frechetforest.curves import Curve, discrete_frechet
from frechetforest.errors import DegenerateSpace, EmptyInput, TooFewItems
from frechetforest.metric import (
    MetricItems,
    frechet_medoid,
    frechet_variance,
    two_means_split,
)

import oracles


def scalars(values):
    return MetricItems(list(values), lambda a, b: abs(a - b))


def test_medoid_singleton():
    assert frechet_medoid(scalars([7.0])) == 0


def test_medoid_three_scalars():
    # sums of squares: 101, 82, 181
    assert frechet_medoid(scalars([0, 1, 10])) == 1


def test_medoid_pair_tie_goes_to_first():
    assert frechet_medoid(scalars([3.0, -2.0])) == 0


def test_medoid_empty():
    with pytest.raises(EmptyInput):
        frechet_medoid(np.zeros((0, 0)))
    with pytest.raises(EmptyInput):
        frechet_variance(scalars([]))


def test_variance_examples():
    assert frechet_variance(scalars([4.0, 4.0, 4.0])) == 0.0
    assert frechet_variance(scalars([0, 2])) == 4.0
    assert frechet_variance(scalars([0, 1, 10])) == 82.0


def test_metric_items_on_curves():
    curves = [Curve.from_values(v) for v in ([0, 1, 0], [0, 0], [5, 5, 5])]
    items = MetricItems(curves, discrete_frechet)
    D = items.matrix()
    assert D[0, 1] == 1.0 and D[1, 2] == 5.0 and D[0, 2] == 5.0
    assert frechet_medoid(items) == oracles.medoid(D.tolist())


def test_medoid_matches_exhaustive_argmin_with_ties():
    rng = np.random.default_rng(11)
    for _ in range(200):
        m = int(rng.integers(1, 12))
        pts = rng.integers(0, 4, size=m).astype(float)  # many ties
        D = np.abs(pts[:, None] - pts[None, :])
        assert frechet_medoid(D) == oracles.medoid(D.tolist())
        assert frechet_variance(D) == pytest.approx(oracles.variance(D.tolist()), abs=0)


def test_two_means_tight_pairs():
    split = two_means_split(scalars([0, 0.1, 10, 10.1]))
    assert split.labels.tolist() == [0, 0, 1, 1]
    assert {split.center_left, split.center_right} <= {0, 1, 2, 3}
    assert split.center_left in (0, 1) and split.center_right in (2, 3)


def best_partition_distortion(D):
    """Brute force over every 2-partition with medoid centers."""
    m = len(D)
    best = np.inf
    for labels in itertools.product((0, 1), repeat=m):
        if len(set(labels)) < 2:
            continue
        total = 0.0
        for c in (0, 1):
            members = [i for i in range(m) if labels[i] == c]
            sub = [[D[i][j] for j in members] for i in members]
            total += oracles.variance(sub)
        best = min(best, total)
    return best


def test_two_means_tight_pairs_is_optimal():
    pts = [0, 0.1, 10, 10.1]
    D = np.abs(np.subtract.outer(pts, pts))
    split = two_means_split(D)
    assert split.distortion == pytest.approx(best_partition_distortion(D.tolist()))


def test_two_means_pair():
    split = two_means_split(scalars([1.0, 4.0]))
    assert split.labels.tolist() == [0, 1]
    assert split.distortion == 0.0


def test_two_means_degenerate():
    with pytest.raises(DegenerateSpace):
        two_means_split(scalars([2.0] * 4))


def test_two_means_too_few():
    with pytest.raises(TooFewItems):
        two_means_split(scalars([2.0]))


def test_two_means_farthest_pair_lexicographic_tie():
    # pairs (0, 2) and (1, 2) both at distance 2: (0, 2) wins
    split = two_means_split(scalars([0.0, 0.0, 2.0]))
    assert (split.center_left, split.center_right) == (0, 2)


def random_matrix(seed, m, dim=2, ties=False):
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, 3, size=(m, dim)).astype(float) if ties else rng.normal(size=(m, dim))
    return np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 30), st.booleans())
def test_two_means_properties(seed, m, ties):
    D = random_matrix(seed, m, ties=ties)
    if D.max() == 0:
        with pytest.raises(DegenerateSpace):
            two_means_split(D)
        return
    split = two_means_split(D)
    cl, cr = split.center_left, split.center_right
    assert cl != cr
    left, right = split.left, split.right
    assert left.size and right.size
    assert cl in left and cr in right
    # Voronoi property with ties resolved left
    assert np.all(D[left, cl] <= D[left, cr])
    assert np.all(D[right, cr] < D[right, cl])
    hist = np.asarray(split.history)
    assert np.all(np.diff(hist) <= 1e-12)
    expected = np.sum(np.where(split.labels == 0, D[:, cl], D[:, cr]) ** 2)
    assert split.distortion == pytest.approx(expected)
    assert split.distortion == pytest.approx(hist[-1])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 25))
def test_medoid_permutation_equivariance(seed, m):
    # continuous coordinates and m >= 3: no medoid ties (m = 2 always ties)
    D = random_matrix(seed, m)
    perm = np.random.default_rng(seed + 1).permutation(m)
    Dp = D[np.ix_(perm, perm)]
    assert perm[frechet_medoid(Dp)] == frechet_medoid(D)
    assert frechet_variance(Dp) == pytest.approx(frechet_variance(D))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 12), st.integers(3, 12))
def test_two_means_permutation_equivariance(seed, m1, m2):
    # Two-member classes tie on their medoid, so order can matter in general;
    # separated clusters of three or more points cannot hit that path.
    rng = np.random.default_rng(seed)
    pts = np.vstack([rng.normal(size=(m1, 2)), rng.normal(size=(m2, 2)) + 50.0])
    m = m1 + m2
    D = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    perm = rng.permutation(m)
    Dp = D[np.ix_(perm, perm)]
    a, b = two_means_split(D), two_means_split(Dp)
    classes = lambda s, order: {frozenset(order[s.left].tolist()), frozenset(order[s.right].tolist())}
    assert classes(a, np.arange(m)) == classes(b, perm) == {frozenset(range(m1)), frozenset(range(m1, m))}
    assert a.distortion == pytest.approx(b.distortion)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_variance_nonnegative(seed):
    D = random_matrix(seed, 10, ties=True)
    assert frechet_variance(D) >= 0
