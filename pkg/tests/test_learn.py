import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

import orghier.learn.model_selection as ms
from orghier.features import FeatureTable, rank_features_gini
from orghier.learn import (
    MANAGEMENT,
    REGULAR,
    NotFittedError,
    TrainedForest,
    flatten_labels,
    grid_search,
    macro_f1,
    naive_grid_search,
    full_grid,
    random_baseline,
    smote,
    stratified_kfold,
    train_forest,
    train_tree,
)


def gini_sum(y):
    if len(y) == 0:
        return 0.0
    _, c = np.unique(y, return_counts=True)
    return len(y) - (c ** 2).sum() / len(y)


def best_split_oracle(X, y):
    """Lowest summed child impurity over every feature and every gap between distinct values."""
    best = gini_sum(y)
    for f in range(X.shape[1]):
        v = np.unique(X[:, f])
        for a, b in zip(v, v[1:]):
            mask = X[:, f] <= (a + b) / 2
            best = min(best, gini_sum(y[mask]) + gini_sum(y[~mask]))
    return best


# ---- labels and metrics ---------------------------------------------------

def test_flatten_labels():
    assert flatten_labels([1, 2, 3], 2).tolist() == [MANAGEMENT, MANAGEMENT, REGULAR]
    assert flatten_labels([1, 2, 3], 3).tolist() == [1, 2, 3]
    y = np.array([1] * 12 + [2] * 8 + [3] * 134)
    assert np.bincount(flatten_labels(y, 2)).tolist() == [0, 20, 0, 134]
    with pytest.raises(ValueError):
        flatten_labels([4], 3)


def test_macro_f1_examples():
    assert macro_f1([1, 2, 1], [1, 2, 1]) == 1.0
    # A: 1 of 2 found, no false alarms; B: 1 true, one A mislabelled as B
    assert macro_f1(["A", "A", "B"], ["A", "B", "B"]) == pytest.approx(2 / 3)
    assert macro_f1([1, 1, 3], [3, 3, 3]) == pytest.approx((0 + 2 * 1 / 4) / 2)
    with pytest.raises(ValueError):
        macro_f1([1, 2], [1])


def test_random_baseline_balanced():
    y = np.array([1, 3] * 500)
    assert random_baseline(y, seed=1, trials=200) == pytest.approx(0.5, abs=0.02)
    assert random_baseline(y, seed=1, trials=50) == random_baseline(y, seed=1, trials=50)


# ---- trees ------------------------------------------------------------------

def test_separable_and_pure():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    t = train_tree(X, [1, 1, 3, 3], max_depth=5)
    assert t.actual_depth == 1 and (t.predict(X) == [1, 1, 3, 3]).all()
    assert t.threshold[0] == 1.5
    pure = train_tree(X, [3, 3, 3, 3], max_depth=5)
    assert pure.n_nodes == 1


def test_eight_row_split_matches_oracle():
    X = np.array([[3, 1], [1, 4], [4, 1], [1, 5], [5, 9], [2, 6], [6, 5], [3, 5]], dtype=float)
    y = np.array([1, 1, 3, 3, 3, 1, 3, 1])
    t = train_tree(X, y, max_depth=1)
    f, thr = t.feature[0], t.threshold[0]
    mask = X[:, f] <= thr
    assert gini_sum(y[mask]) + gini_sum(y[~mask]) == pytest.approx(best_split_oracle(X, y))


tables = st.integers(2, 10).flatmap(lambda n: st.tuples(
    hnp.arrays(np.float64, (n, 3), elements=st.integers(0, 4).map(float)),
    hnp.arrays(np.int64, n, elements=st.integers(1, 3))))


@given(tables, st.integers(0, 2**31))
def test_root_split_is_exhaustive_optimum(xy, seed):
    X, y = xy
    t = train_tree(X, y, max_depth=1, seed=seed)
    oracle = best_split_oracle(X, y)
    if t.feature[0] < 0:
        assert oracle >= gini_sum(y) - 1e-9
        return
    mask = X[:, t.feature[0]] <= t.threshold[0]
    assert gini_sum(y[mask]) + gini_sum(y[~mask]) == pytest.approx(oracle, abs=1e-9)
    assert t.decrease[0] == pytest.approx(gini_sum(y) - oracle, abs=1e-9)


@given(tables, st.integers(1, 6), st.integers(1, 3), st.integers(0, 1000))
def test_depth_bound_and_truncation(xy, depth, mf, seed):
    X, y = xy
    deep = train_tree(X, y, max_depth=8, max_features=mf, seed=seed)
    t = train_tree(X, y, max_depth=depth, max_features=mf, seed=seed)
    assert t.actual_depth <= depth
    assert (t.decrease[t.feature >= 0] > 0).all()
    cut = deep.truncated(depth)
    for name in ("feature", "threshold", "left", "right", "depth", "counts", "decrease"):
        assert np.array_equal(getattr(cut, name), getattr(t, name)), name
    assert np.array_equal(t.predict(X), train_tree(X, y, max_depth=depth, max_features=mf, seed=seed).predict(X))


def test_gini_ranking_hand_computed():
    # rows (f0, f1, class); root: f0 <= 1.5 isolates the lone B, then f1 <= 0.5 splits the rest
    X = np.array([[5, 0], [2, 0], [1, 0], [4, 1], [6, 0], [3, 1]], dtype=float)
    y = np.array([1, 1, 3, 3, 1, 1])
    t = train_tree(X, y, max_depth=2)
    # n*gini: root 6 - 20/6 = 8/3, right child (4A,1B) 5 - 17/5 = 8/5, its split leaves (3A) 0 and (A,B) 1
    assert t.impurity_decrease() == pytest.approx([(8 / 3 - 8 / 5) / 6, (8 / 5 - 1) / 6])
    table = FeatureTable(tuple("abcdef"), ("indegree", "outdegree"), X, y)
    ranking = rank_features_gini(t, table)
    assert ranking.names == ["indegree", "outdegree"]
    assert ranking.score("indegree") == pytest.approx(16 / 25) and ranking.score("outdegree") == pytest.approx(9 / 25)
    with pytest.raises(NotFittedError):
        rank_features_gini(None, table)


def test_single_split_ranking_and_unused_feature():
    X = np.array([[0, 5], [1, 5], [2, 5], [3, 5]], dtype=float)
    table = FeatureTable(tuple("abcd"), ("indegree", "outdegree"), X, np.array([1, 1, 3, 3]))
    r = rank_features_gini(train_tree(X, table.labels, 3), table)
    assert r.items[0] == ("indegree", 1.0)
    forest = train_forest(X, table.labels, 3, 2, 10, seed=2)
    assert rank_features_gini(forest, table).score("outdegree") == 0.0


def test_forest_properties():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 4))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=40) > 0, 1, 3)
    single = train_forest(X, y, 4, 2, 1, seed=9, bootstrap=False)
    tree = train_tree(X, y, 4, 2, seed=9)
    assert np.array_equal(single.trees[0].feature, tree.feature)
    assert np.array_equal(single.predict(X), tree.predict(X))
    big = train_forest(X, y, 4, 2, 8, seed=3)
    small = train_forest(X, y, 4, 2, 3, seed=3)
    assert len(big.trees) == 8
    for a, b in zip(small.trees, big.trees):
        assert np.array_equal(a.threshold, b.threshold) and np.array_equal(a.feature, b.feature)
    again = train_forest(X, y, 4, 2, 8, seed=3)
    assert np.array_equal(again.predict(X), big.predict(X))


def test_forest_tie_goes_to_higher_level():
    X = np.zeros((3, 1))
    classes = np.array([1, 2, 3])
    votes_3 = train_tree(X, [3, 3, 3], 1, classes=classes)
    votes_2 = train_tree(X, [2, 2, 2], 1, classes=classes)
    assert TrainedForest([votes_3, votes_2], classes, 2).predict(X).tolist() == [2, 2, 2]
    assert TrainedForest([votes_3, votes_3], classes, 2).predict(X).tolist() == [3, 3, 3]


# ---- SMOTE --------------------------------------------------------------------

def test_smote_examples():
    X = np.vstack([np.arange(20).reshape(10, 2), [[0, 0], [1, 1], [0, 0]]]).astype(float)
    y = np.array([3] * 10 + [1] * 3)
    Xs, ys = smote(X, y, seed=4)
    assert np.bincount(ys).tolist() == [0, 10, 0, 10]
    assert np.array_equal(Xs[:13], X) and np.array_equal(ys[:13], y)
    same = np.array([[2.0, 2.0]] * 3 + [[9.0, 9.0]] * 6)
    Xs, ys = smote(same, [1, 1, 1] + [3] * 6, seed=0)
    assert (Xs[ys == 1] == 2.0).all()
    with pytest.warns(UserWarning):
        Xs, ys = smote(np.array([[1.0], [2.0], [3.0]]), [1, 3, 3])
    assert Xs[ys == 1].ravel().tolist() == [1.0, 1.0]


def on_segment(p, a, b):
    d = b - a
    if not d.any():
        return np.allclose(p, a)
    lam = np.dot(p - a, d) / np.dot(d, d)
    return -1e-12 <= lam <= 1 + 1e-12 and np.allclose(a + lam * d, p, atol=1e-9)


@given(st.integers(2, 6), st.integers(7, 14), st.integers(1, 6), st.integers(0, 10**6))
def test_smote_geometry(n_min, n_maj, k, seed):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(size=(n_min, 2)), rng.normal(3, 1, size=(n_maj, 2))])
    y = np.array([1] * n_min + [3] * n_maj)
    Xs, ys = smote(X, y, k=k, seed=seed)
    assert np.bincount(ys)[1] == np.bincount(ys)[3] == n_maj
    members = X[:n_min]
    kk = min(k, n_min - 1)
    dist = np.linalg.norm(members[:, None] - members[None], axis=2)
    np.fill_diagonal(dist, np.inf)
    for p in Xs[len(X):]:
        ok = False
        for i in range(n_min):
            nearest = np.sort(dist[i])[kk - 1]
            for j in np.flatnonzero(dist[i] <= nearest):
                ok = ok or on_segment(p, members[i], members[j])
        assert ok
    Xs2, _ = smote(X, y, k=k, seed=seed)
    assert np.array_equal(Xs, Xs2)


# ---- folds and grid search ------------------------------------------------------

def test_folds_examples():
    y = np.array([1] * 5 + [3] * 5)
    folds = stratified_kfold(y, 5, seed=1)
    for tr, va in folds:
        assert sorted(y[va].tolist()) == [1, 3]
    assert all(np.array_equal(a[1], b[1]) for a, b in zip(folds, stratified_kfold(y, 5, seed=1)))
    with pytest.raises(ValueError):
        stratified_kfold(np.ones(10), 5)
    with pytest.warns(UserWarning):
        assert len(stratified_kfold(np.array([1] * 3 + [3] * 10), 5)) == 3


@given(st.lists(st.integers(1, 3), min_size=15, max_size=60), st.integers(0, 1000))
def test_folds_partition(labels, seed):
    y = np.array(labels)
    if np.bincount(y, minlength=4)[1:].max() == len(y) or min(c for c in np.bincount(y)[1:] if c) < 2:
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        folds = stratified_kfold(y, 5, seed)
    valid = np.concatenate([va for _, va in folds])
    assert sorted(valid.tolist()) == list(range(len(y)))
    for tr, va in folds:
        assert np.intersect1d(tr, va).size == 0 and len(tr) + len(va) == len(y)
    for c in np.unique(y):
        per_fold = [np.sum(y[va] == c) for _, va in folds]
        assert max(per_fold) - min(per_fold) <= 1


def small_problem(seed=0, n=36):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = np.where(X[:, 0] + X[:, 1] + rng.normal(size=n) > 0.8, 1, 3)
    return X, y


@pytest.mark.parametrize("model", ["tree", "forest"])
def test_fast_grid_equals_naive(model):
    X, y = small_problem()
    grid = {"max_depth": [1, 2, 4], "max_features": [1, 3]}
    if model == "forest":
        grid["n_estimators"] = [1, 2, 5]
    fast = grid_search(X, y, grid, model, seed=5)
    slow = naive_grid_search(X, y, grid, model, seed=5)
    assert fast.scores == slow.scores
    assert fast.best_params == slow.best_params
    assert fast.best_score == max(s for _, s in fast.scores)
    first_best = next(p for p, s in fast.scores if s == fast.best_score)
    assert fast.best_params == first_best


def test_grid_single_point_and_sizes():
    X, y = small_problem(1)
    r = grid_search(X, y, {"max_depth": [2], "max_features": [1]}, "tree")
    assert r.best_params == {"max_depth": 2, "max_features": 1} and len(r.scores) == 1
    grid = full_grid("tree", 16)
    assert len(grid["max_depth"]) * len(grid["max_features"]) == 320
    assert full_grid("forest", 15)["n_estimators"] == [1, 2, 4, 8, 16, 32, 64, 100, 200]


def test_validation_rows_never_reach_training(monkeypatch):
    X, y = small_problem(2, n=40)
    poison = 987654.321
    X[7, 2] = poison
    seen = []
    real_smote = ms.smote

    def spy(Xtr, ytr, **kw):
        seen.append(bool((Xtr == poison).any()))
        return real_smote(Xtr, ytr, **kw)

    monkeypatch.setattr(ms, "smote", spy)
    folds = stratified_kfold(y, 5, seed=3)
    holder = [f for f, (_, va) in enumerate(folds) if 7 in va][0]
    ms.grid_search(X, y, {"max_depth": [3], "max_features": [3]}, "tree", seed=3)
    assert seen[holder] is False and sum(seen) == len(folds) - 1
    for f, Xtr, _, Xva, _, _ in ms._fold_data(X, y, folds, 3, False, 5):
        assert ((Xtr == poison).any()) != ((Xva == poison).any())


def test_grid_search_is_reproducible():
    X, y = small_problem(4)
    grid = {"max_depth": [1, 3], "max_features": [2], "n_estimators": [4]}
    a = grid_search(X, y, grid, "forest", seed=11)
    b = grid_search(X, y, grid, "forest", seed=11)
    assert a.scores == b.scores and a.fold_scores == b.fold_scores


def test_holdout_mode():
    X, y = small_problem(5, n=60)
    tr, te = ms.holdout_split(y, 0.25, seed=1)
    assert np.intersect1d(tr, te).size == 0 and len(tr) + len(te) == 60
    result, score = ms.holdout_evaluate(X, y, {"max_depth": [2], "max_features": [2]}, "tree", 0.25, seed=1)
    assert 0.0 <= score <= 1.0 and result.best_params == {"max_depth": 2, "max_features": 2}
