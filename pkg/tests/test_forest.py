import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from graphsentry.forest import (
    GiniForestClassifier,
    gini_impurity,
    grow_tree,
    tree_importances,
    tree_predict_proba,
)
from oracles import gini_oracle


class TestGiniImpurity:
    def test_closed_forms(self):
        assert gini_impurity([1, 1, 1, 1]) == 0.75
        assert gini_impurity([10, 0]) == 0.0
        assert gini_impurity([5, 5]) == 0.5
        assert gini_impurity([2, 1, 1]) == pytest.approx(0.625)

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=6).filter(sum))
    def test_matches_oracle(self, counts):
        assert gini_impurity(counts) == pytest.approx(gini_oracle(counts), abs=1e-12)

    def test_invalid_histograms_rejected(self):
        with pytest.raises(ValueError):
            gini_impurity([])
        with pytest.raises(ValueError):
            gini_impurity([3, -1])
        with pytest.raises(ValueError):
            gini_impurity([0, 0])


class TestGrowTree:
    def test_single_split_threshold_is_midpoint(self):
        X = np.array([[1.0], [2.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1])
        root = grow_tree(X, y, rng=0)
        assert root.feature == 0
        assert root.threshold == 6.0
        assert root.left.is_leaf and root.right.is_leaf
        assert root.decrease == pytest.approx(0.5)

    def test_pure_node_stays_leaf(self):
        root = grow_tree(np.array([[0.0], [1.0]]), np.array([1, 1]), rng=0)
        assert root.is_leaf

    def test_max_depth_zero_is_stump(self):
        X = np.array([[0.0], [1.0]])
        root = grow_tree(X, np.array([0, 1]), max_depth=0, rng=0)
        assert root.is_leaf
        assert list(root.counts) == [1.0, 1.0]

    def test_min_leaf_respected(self):
        X = np.arange(8, dtype=float).reshape(-1, 1)
        y = np.array([0, 0, 0, 0, 1, 1, 1, 0])
        root = grow_tree(X, y, min_leaf=3, rng=0)

        def leaf_sizes(node):
            if node.is_leaf:
                return [node.n_samples]
            return leaf_sizes(node.left) + leaf_sizes(node.right)

        assert min(leaf_sizes(root)) >= 3

    def test_xor_needs_zero_gain_splits(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        root = grow_tree(X, y, max_depth=2, features_per_split=2, rng=0)
        assert np.array_equal(np.argmax(tree_predict_proba(root, X), axis=1), y)

    def test_adjacent_float_threshold_regression(self):
        # the midpoint of these adjacent floats rounds up to the larger one;
        # an unclamped threshold would send every row left forever
        a = 9.486494471372438e-07
        b = float(np.nextafter(a, np.inf))
        X = np.array([[a], [b], [a], [b]])
        y = np.array([0, 1, 0, 1])
        root = grow_tree(X, y, rng=0)
        proba = tree_predict_proba(root, X)
        assert np.all(np.isfinite(proba))
        assert np.array_equal(np.argmax(proba, axis=1), y)

    def test_labels_validated_against_n_classes(self):
        with pytest.raises(ValueError, match="exceed"):
            grow_tree(np.zeros((2, 1)), np.array([0, 3]), n_classes=2)

    def test_feature_subset_validated(self):
        with pytest.raises(ValueError, match="features_per_split"):
            grow_tree(np.zeros((2, 2)), np.array([0, 1]), features_per_split=5)

    def test_importances_locate_signal(self):
        rng = np.random.default_rng(0)
        X = rng.random((200, 4))
        y = (X[:, 2] > 0.5).astype(np.int64)
        root = grow_tree(X, y, rng=1)
        imp = tree_importances(root, 4)
        assert int(np.argmax(imp)) == 2


class TestForestClassifier:
    def _toy(self, n=120, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.random((n, 5))
        y = (X[:, 1] + 0.1 * rng.random(n) > 0.55).astype(np.int64)
        return X, y

    def test_fit_predict_accuracy(self):
        X, y = self._toy()
        clf = GiniForestClassifier(n_trees=30, seed=0).fit(X, y)
        assert (clf.predict(X) == y).mean() > 0.95

    def test_proba_rows_are_distributions(self):
        X, y = self._toy()
        proba = GiniForestClassifier(n_trees=10, seed=0).fit(X, y).predict_proba(X)
        assert proba.shape == (len(X), 2)
        assert np.all(proba >= 0)
        assert np.allclose(proba.sum(axis=1), 1.0)

    def test_importances_sum_to_one(self):
        X, y = self._toy()
        clf = GiniForestClassifier(n_trees=25, seed=3).fit(X, y)
        assert clf.feature_importances_.sum() == pytest.approx(1.0, abs=1e-9)
        assert not clf.importances_uniform_

    def test_signal_feature_ranked_first(self):
        X, y = self._toy(seed=4)
        clf = GiniForestClassifier(n_trees=40, seed=0).fit(X, y)
        assert int(np.argmax(clf.feature_importances_)) == 1

    def test_unsplittable_data_falls_back_to_uniform(self):
        X = np.ones((20, 3))
        y = np.array([0, 1] * 10)
        clf = GiniForestClassifier(n_trees=5, seed=0).fit(X, y)
        assert clf.importances_uniform_
        assert np.allclose(clf.feature_importances_, 1.0 / 3.0)

    def test_deterministic_across_refits(self):
        X, y = self._toy()
        for seed in range(20):
            a = GiniForestClassifier(n_trees=6, seed=seed).fit(X, y)
            b = GiniForestClassifier(n_trees=6, seed=seed).fit(X, y)
            assert np.array_equal(a.predict_proba(X), b.predict_proba(X))

    def test_smaller_forest_is_prefix_of_larger(self):
        from graphsentry.forest import _tree_to_dict

        X, y = self._toy()
        small = GiniForestClassifier(n_trees=5, seed=11).fit(X, y)
        large = GiniForestClassifier(n_trees=12, seed=11).fit(X, y)
        for ts, tl in zip(small.trees_, large.trees_):
            assert _tree_to_dict(ts) == _tree_to_dict(tl)

    def test_seed_changes_forest(self):
        X, y = self._toy()
        a = GiniForestClassifier(n_trees=10, seed=0).fit(X, y)
        b = GiniForestClassifier(n_trees=10, seed=1).fit(X, y)
        assert not np.array_equal(a.predict_proba(X), b.predict_proba(X))

    def test_multiclass(self):
        rng = np.random.default_rng(2)
        X = rng.random((150, 3))
        y = np.digitize(X[:, 0], [0.33, 0.66]).astype(np.int64)
        clf = GiniForestClassifier(n_trees=25, seed=0).fit(X, y)
        assert clf.n_classes_ == 3
        assert (clf.predict(X) == y).mean() > 0.9


class TestForestEstimatorApi:
    def test_params_round_trip(self):
        clf = GiniForestClassifier(n_trees=7, max_depth=3, seed=5)
        params = clf.get_params()
        other = GiniForestClassifier().set_params(**params)
        assert other.get_params() == params

    def test_unknown_param_rejected(self):
        with pytest.raises(ValueError, match="unknown parameter"):
            GiniForestClassifier().set_params(bogus=1)

    def test_unfitted_predict_rejected(self):
        with pytest.raises(ValueError, match="not fitted"):
            GiniForestClassifier().predict(np.zeros((1, 2)))

    def test_feature_count_checked_at_predict(self):
        clf = GiniForestClassifier(n_trees=3, seed=0).fit(np.zeros((4, 2)),
                                                          np.array([0, 1, 0, 1]))
        with pytest.raises(ValueError, match="features"):
            clf.predict(np.zeros((2, 5)))

    def test_feature_names_length_checked(self):
        clf = GiniForestClassifier(n_trees=2, feature_names=["a"])
        with pytest.raises(ValueError, match="feature_names"):
            clf.fit(np.zeros((4, 2)), np.array([0, 1, 0, 1]))


class TestForestSerialization:
    def test_round_trip_preserves_model(self, tmp_path):
        rng = np.random.default_rng(1)
        X = rng.random((60, 4))
        y = (X[:, 0] > 0.5).astype(np.int64)
        clf = GiniForestClassifier(n_trees=8, seed=2,
                                   feature_names=list("abcd")).fit(X, y)
        path = tmp_path / "forest.json"
        clf.save(path)
        back = GiniForestClassifier.load(path)
        assert back.get_params() == clf.get_params()
        assert np.array_equal(back.predict_proba(X), clf.predict_proba(X))
        assert np.allclose(back.feature_importances_, clf.feature_importances_)

    def test_save_is_stable_json(self, tmp_path):
        X = np.arange(10, dtype=float).reshape(-1, 1)
        y = (X[:, 0] > 4).astype(np.int64)
        clf = GiniForestClassifier(n_trees=3, seed=0).fit(X, y)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        clf.save(p1)
        clf.save(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_format_guarded(self):
        with pytest.raises(ValueError, match="not a serialized forest"):
            GiniForestClassifier.from_json({"format": "something-else"})
        with pytest.raises(ValueError, match="version"):
            GiniForestClassifier.from_json(
                {"format": "graphsentry-forest", "format_version": 99})

    def test_unfitted_save_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="not fitted"):
            GiniForestClassifier().save(tmp_path / "x.json")

    def test_file_is_valid_json(self, tmp_path):
        X = np.arange(6, dtype=float).reshape(-1, 1)
        y = np.array([0, 0, 0, 1, 1, 1])
        path = tmp_path / "f.json"
        GiniForestClassifier(n_trees=2, seed=0).fit(X, y).save(path)
        payload = json.loads(path.read_text())
        assert payload["format"] == "graphsentry-forest"
        assert len(payload["trees"]) == 2
