import json

import numpy as np
import pytest

from frechetforest.errors import InvalidParams, NoOOBCoverage
from frechetforest.forest import (
    Forest,
    ForestParams,
    oob_error,
    oob_summary,
    permutation_stream,
    predict_forest,
    train_forest,
    tree_stream,
    variable_importance,
    worker_count,
)
from frechetforest.io import dump_model
from frechetforest.tree import grow_maximal_tree

import oracles
from builders import miniature, noisy_scalar_dataset, scalar_dataset


def inputs_of(data, i):
    return [data.inputs[j][i] for j in range(data.p)]


def test_params_validation():
    data = noisy_scalar_dataset(10)
    for bad in (ForestParams(q=0), ForestParams(mtry=3), ForestParams(min_node_size=0),
                ForestParams(prune_mode="x"), ForestParams(seed=-1)):
        with pytest.raises(InvalidParams):
            train_forest(data, bad)


def test_single_tree_forest_is_its_tree():
    data = noisy_scalar_dataset(30, seed=1)
    params = ForestParams(q=1, mtry=1, seed=17)
    forest = train_forest(data, params)
    rng = tree_stream(17, 0)
    bag = rng.integers(0, data.n, size=data.n)
    tree = grow_maximal_tree(data, bag, 1, 1, rng)
    assert np.array_equal(forest.bags[0], bag)
    assert json.dumps(forest.trees[0].to_dict()) == json.dumps(tree.to_dict())
    for i in range(data.n):
        x = inputs_of(data, i)
        assert predict_forest(forest, x) == tree.predict(x)
    assert np.array_equal(forest.predict_indices(data, np.arange(data.n)),
                          tree.predict_indices(data, np.arange(data.n)))


def test_bags_are_full_size_draws():
    data = noisy_scalar_dataset(25, seed=2)
    forest = train_forest(data, ForestParams(q=5, seed=3))
    for bag, tree in zip(forest.bags, forest.trees):
        assert bag.size == data.n
        assert sorted(tree.obs[0].tolist()) == sorted(bag.tolist())


def test_training_is_deterministic():
    data = noisy_scalar_dataset(30, p=3, seed=4)
    params = ForestParams(q=6, mtry=2, seed=99)
    assert dump_model(train_forest(data, params)) == dump_model(train_forest(data, params))


def test_worker_count_does_not_change_forest(monkeypatch):
    data = noisy_scalar_dataset(30, p=3, seed=5)
    params = ForestParams(q=6, mtry=1, seed=7)
    one = dump_model(train_forest(data, params, n_jobs=1))
    assert dump_model(train_forest(data, params, n_jobs=2)) == one
    monkeypatch.setenv("FRECHETFOREST_WORKERS", "2")
    assert worker_count() == 2
    assert dump_model(train_forest(data, params)) == one


def test_different_seeds_differ():
    data = noisy_scalar_dataset(30, seed=6)
    a = train_forest(data, ForestParams(q=3, seed=1))
    b = train_forest(data, ForestParams(q=3, seed=2))
    assert dump_model(a) != dump_model(b)


def constant_tree_forest(values):
    """One single-leaf tree per value, predicting that constant."""
    data = scalar_dataset([range(len(values))], values)
    trees = [grow_maximal_tree(data, obs=[i]) for i in range(len(values))]
    bags = [np.array([i]) for i in range(len(values))]
    forest = Forest(trees, bags, ForestParams(q=len(values)), list(data.variable_names),
                    data.n, np.arange(data.n))
    return data, forest


def test_forest_medoid_of_three_constants():
    data, forest = constant_tree_forest([0.0, 1.0, 10.0])
    assert predict_forest(forest, inputs_of(data, 0)) == data.outputs[1]


def test_forest_all_trees_agree():
    data, forest = constant_tree_forest([4.0, 4.0, 4.0])
    assert predict_forest(forest, inputs_of(data, 2)) == data.outputs[0]


def test_forest_prediction_is_one_of_the_tree_predictions():
    data = noisy_scalar_dataset(30, seed=8)
    forest = train_forest(data, ForestParams(q=9, seed=2))
    D = data.distances().output
    for i in range(data.n):
        x = inputs_of(data, i)
        preds = [t.predict(x) for t in forest.trees]
        out = predict_forest(forest, x)
        assert out in preds
        # medoid over tree predictions, counting repeats
        idx = [int(t.value[t.apply(x)]) for t in forest.trees]
        sub = D[np.ix_(idx, idx)].tolist()
        assert out == data.outputs[idx[oracles.medoid(sub)]]


def test_oob_single_tree_recomputation():
    data = noisy_scalar_dataset(40, seed=9)
    forest = train_forest(data, ForestParams(q=1, seed=5))
    rows = np.setdiff1d(np.arange(data.n), forest.bags[0])
    D = data.distances().output
    expected = np.mean(D[forest.trees[0].predict_indices(data, rows), rows] ** 2)
    summary = oob_summary(forest, data)
    assert summary.error == pytest.approx(expected, rel=1e-12)
    assert summary.n_covered == rows.size
    assert summary.n_excluded == data.n - rows.size


def test_oob_zero_for_memorizing_forest():
    data, _ = miniature(replicates=3)
    forest = train_forest(data, ForestParams(q=30, mtry=2, seed=1))
    assert oob_error(forest, data) == 0.0


def test_oob_coverage_error():
    data = scalar_dataset([[1.0]], [2.0])
    forest = train_forest(data, ForestParams(q=3))
    with pytest.raises(NoOOBCoverage):
        oob_error(forest, data)
    with pytest.raises(NoOOBCoverage):
        variable_importance(forest, data)


def test_unused_variable_importance_exactly_zero():
    rng = np.random.default_rng(0)
    n = 40
    informative = rng.normal(size=n)
    constant = np.zeros(n)  # unsplittable everywhere
    data = scalar_dataset([informative, constant], 4 * (informative > 0) + rng.normal(scale=0.3, size=n))
    for seed in (1, 2):
        forest = train_forest(data, ForestParams(q=10, mtry=2, seed=seed))
        assert 1 not in forest.used_variables()
        report = variable_importance(forest, data, permutation_seed=3)
        assert report.scores[1] == 0.0
        assert report.scores[0] > 0


def test_importance_seed_isolation():
    data = noisy_scalar_dataset(40, p=3, seed=10)
    forest = train_forest(data, ForestParams(q=8, mtry=1, seed=4))
    before = dump_model(forest)
    a = variable_importance(forest, data, permutation_seed=1)
    b = variable_importance(forest, data, permutation_seed=1)
    c = variable_importance(forest, data, permutation_seed=2)
    assert np.array_equal(a.scores, b.scores)
    assert not np.array_equal(a.scores, c.scores)
    assert dump_model(forest) == before
    assert np.array_equal(variable_importance(forest, data, 1, n_jobs=2).scores, a.scores)


def test_importance_matches_direct_recomputation():
    data = noisy_scalar_dataset(30, p=2, seed=11)
    forest = train_forest(data, ForestParams(q=4, mtry=1, seed=6))
    D = data.distances().output
    report = variable_importance(forest, data, permutation_seed=8)
    diffs = np.zeros((4, 2))
    for l, tree in enumerate(forest.trees):
        rows = forest.oob_rows(l)
        base = np.mean(D[tree.predict_indices(data, rows), rows] ** 2)
        assert report.tree_oob_errors[l] == pytest.approx(base)
        for j in range(2):
            perm = rows[permutation_stream(8, l, j).permutation(rows.size)]
            # route rows with variable j read from the permuted rows
            pred = []
            for r, pr in zip(rows, perm):
                x = inputs_of(data, r)
                x[j] = data.inputs[j][pr]
                pred.append(tree.value[tree.apply(x)])
            diffs[l, j] = np.mean(D[pred, rows] ** 2) - base
    assert np.allclose(report.scores, diffs.mean(axis=0))
    assert sorted(report.ranks().tolist()) == [1, 2]


def test_forest_roundtrip():
    data = noisy_scalar_dataset(20, seed=12)
    forest = train_forest(data, ForestParams(q=4, seed=3))
    text = dump_model(forest)
    back = Forest.from_dict(json.loads(text))
    assert dump_model(back) == text
    for i in range(data.n):
        assert predict_forest(back, inputs_of(data, i)) == predict_forest(forest, inputs_of(data, i))


def test_forest_on_row_subset():
    data = noisy_scalar_dataset(30, seed=13)
    rows = np.arange(0, 30, 2)
    forest = train_forest(data, ForestParams(q=5, seed=1), obs=rows)
    for l, bag in enumerate(forest.bags):
        assert set(bag.tolist()) <= set(rows.tolist())
        assert set(forest.oob_rows(l).tolist()) <= set(rows.tolist())


def test_pruned_forest_trees():
    data = noisy_scalar_dataset(30, seed=14)
    full = train_forest(data, ForestParams(q=3, seed=2))
    pruned = train_forest(data, ForestParams(q=3, seed=2, prune_mode="hubert"))
    for a, b in zip(full.trees, pruned.trees):
        assert b.leaf_count <= a.leaf_count
