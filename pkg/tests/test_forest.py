import numpy as np
import pytest

from nsdetect import (
    PreconditionError,
    RFConfig,
    RFModel,
    ShapeMismatchError,
    impurity,
    predict_rf,
    predict_rf_batch,
    train_rf,
)
from nsdetect.forest import Tree

from conftest import make_training_set


def traverse_tree(tree: Tree, x: np.ndarray) -> float:
    """Independent single-tree walk: left iff x[f] <= threshold."""
    node = 0
    while tree.feature[node] >= 0:
        if x[tree.feature[node]] <= tree.threshold[node]:
            node = tree.left[node]
        else:
            node = tree.right[node]
    return float(tree.value[node])


def forest_oracle(model: RFModel, x: np.ndarray) -> float:
    return float(np.mean([traverse_tree(t, x) for t in model.trees]))


def best_split_oracle(points, labels, criterion):
    """Exhaustive search over all features and midpoint thresholds.

    Returns the maximum weighted-impurity decrease achievable at the node.
    """
    n = len(labels)
    parent = impurity(labels, criterion)
    best = 0.0
    for f in range(points.shape[1]):
        values = np.unique(points[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            thr = (lo + hi) / 2
            mask = points[:, f] <= thr
            n_l = int(mask.sum())
            if n_l == 0 or n_l == n:
                continue
            weighted = (
                n_l * impurity(labels[mask], criterion)
                + (n - n_l) * impurity(labels[~mask], criterion)
            ) / n
            best = max(best, parent - weighted)
    return best


def random_labeled_data(rng, n=60, dims=4):
    points = rng.normal(size=(n, dims))
    labels = (points[:, 0] + 0.3 * rng.normal(size=n) > 0).astype(int)
    if labels.min() == labels.max():
        labels[0] = 1 - labels[0]
    return points, labels


class TestImpurity:
    def test_maximal(self):
        assert impurity([0, 1], "gini") == 0.5
        assert impurity([0, 1], "entropy") == 1.0

    def test_pure(self):
        assert impurity([1, 1, 1], "gini") == 0.0
        assert impurity([0, 0], "entropy") == 0.0

    def test_quarter(self):
        # 1 - 0.0625 - 0.5625, by hand
        assert impurity([1, 0, 0, 0], "gini") == pytest.approx(0.375, abs=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(PreconditionError):
            impurity([], "gini")

    def test_unknown_criterion(self):
        with pytest.raises(PreconditionError):
            impurity([0, 1], "mse")


class TestPredict:
    def test_constant_single_leaf_tree(self):
        tree = Tree(
            feature=np.array([-1], dtype=np.int32),
            threshold=np.zeros(1),
            left=np.array([-1], dtype=np.int32),
            right=np.array([-1], dtype=np.int32),
            value=np.array([0.75]),
            count=np.array([4], dtype=np.int32),
        )
        model = RFModel([tree], RFConfig(num_estimators=1), input_dim=3)
        assert predict_rf(model, np.zeros(3)) == 0.75
        assert predict_rf(model, np.full(3, 9.9)) == 0.75

    def test_two_tree_mean(self):
        leaf = dict(
            feature=np.array([-1], dtype=np.int32),
            threshold=np.zeros(1),
            left=np.array([-1], dtype=np.int32),
            right=np.array([-1], dtype=np.int32),
            count=np.array([1], dtype=np.int32),
        )
        model = RFModel(
            [Tree(value=np.array([1.0]), **leaf), Tree(value=np.array([0.0]), **leaf)],
            RFConfig(num_estimators=2),
            input_dim=2,
        )
        assert predict_rf(model, np.zeros(2)) == 0.5

    def test_matches_traversal_oracle_exactly(self):
        rng = np.random.default_rng(0)
        points, labels = random_labeled_data(rng, n=120)
        model = train_rf(make_training_set(points, labels),
                         RFConfig(num_estimators=15, seed=1))
        queries = rng.normal(size=(200, 4))
        scores = predict_rf_batch(model, queries)
        for i in range(queries.shape[0]):
            assert scores[i] == forest_oracle(model, queries[i])

    def test_dimension_mismatch(self):
        rng = np.random.default_rng(1)
        points, labels = random_labeled_data(rng)
        model = train_rf(make_training_set(points, labels),
                         RFConfig(num_estimators=2, seed=0))
        with pytest.raises(ShapeMismatchError):
            predict_rf(model, np.zeros(5))


class TestTraining:
    def test_separable_one_dimensional(self):
        rng = np.random.default_rng(2)
        low = rng.uniform(-2, 0, 40)
        high = rng.uniform(1, 3, 40)
        points = np.concatenate([low, high]).reshape(-1, 1)
        labels = np.concatenate([np.zeros(40, int), np.ones(40, int)])
        model = train_rf(make_training_set(points, labels),
                         RFConfig(num_estimators=10, max_depth=3, seed=3))
        preds = predict_rf_batch(model, points) >= 0.5
        assert np.mean(preds == labels.astype(bool)) == 1.0

    def test_single_class_rejected(self):
        ts = make_training_set(np.random.default_rng(0).normal(size=(10, 2)),
                               np.zeros(10, int))
        with pytest.raises(PreconditionError):
            train_rf(ts, RFConfig(num_estimators=2))

    def test_pure_leaves_stop(self):
        rng = np.random.default_rng(4)
        points, labels = random_labeled_data(rng)
        model = train_rf(make_training_set(points, labels),
                         RFConfig(num_estimators=5, seed=5))
        for tree in model.trees:
            pure = (tree.value == 0.0) | (tree.value == 1.0)
            assert np.all(tree.feature[pure] == -1)

    def test_depth_bound(self):
        rng = np.random.default_rng(5)
        points, labels = random_labeled_data(rng, n=200)
        model = train_rf(make_training_set(points, labels),
                         RFConfig(num_estimators=5, max_depth=4, seed=6))
        for tree in model.trees:
            depth = np.zeros(tree.n_nodes, dtype=int)
            for node in range(tree.n_nodes):
                for child in (tree.left[node], tree.right[node]):
                    if child >= 0:
                        depth[child] = depth[node] + 1
            assert depth.max() <= 4

    def test_leaf_and_split_minimums(self):
        rng = np.random.default_rng(6)
        points, labels = random_labeled_data(rng, n=150)
        config = RFConfig(num_estimators=5, min_samples_leaf=7,
                          min_samples_split=20, seed=7)
        model = train_rf(make_training_set(points, labels), config)
        for tree in model.trees:
            leaves = tree.feature == -1
            assert np.all(tree.count[leaves] >= 7)
            assert np.all(tree.count[~leaves] >= 20)

    def test_every_split_strictly_decreases_impurity(self):
        rng = np.random.default_rng(7)
        points, labels = random_labeled_data(rng, n=100)
        config = RFConfig(num_estimators=3, bootstrap=False, max_features=4, seed=8)
        model = train_rf(make_training_set(points, labels), config)
        for tree in model.trees:
            # Reconstruct each node's sample set by walking from the root.
            node_rows = {0: np.arange(points.shape[0])}
            for node in range(tree.n_nodes):
                rows = node_rows[node]
                if tree.feature[node] < 0:
                    continue
                mask = points[rows, tree.feature[node]] <= tree.threshold[node]
                l_rows, r_rows = rows[mask], rows[~mask]
                node_rows[int(tree.left[node])] = l_rows
                node_rows[int(tree.right[node])] = r_rows
                parent = impurity(labels[rows], "gini")
                child = (
                    l_rows.size * impurity(labels[l_rows], "gini")
                    + r_rows.size * impurity(labels[r_rows], "gini")
                ) / rows.size
                assert child < parent

    def test_small_node_splits_match_exhaustive_oracle(self):
        rng = np.random.default_rng(8)
        for trial in range(25):
            n = int(rng.integers(4, 21))
            points = rng.normal(size=(n, 3))
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            criterion = "gini" if trial % 2 == 0 else "entropy"
            config = RFConfig(num_estimators=1, max_depth=1, max_features=3,
                              bootstrap=False, criterion=criterion, seed=trial)
            model = train_rf(make_training_set(points, labels), config)
            tree = model.trees[0]
            oracle_gain = best_split_oracle(points, labels, criterion)
            if tree.feature[0] < 0:
                assert oracle_gain == pytest.approx(0.0, abs=1e-12)
                continue
            mask = points[:, tree.feature[0]] <= tree.threshold[0]
            realized = impurity(labels, criterion) - (
                mask.sum() * impurity(labels[mask], criterion)
                + (~mask).sum() * impurity(labels[~mask], criterion)
            ) / n
            assert realized == pytest.approx(oracle_gain, abs=1e-12)

    def test_equal_gain_tie_breaks_to_lowest_feature(self):
        # Two identical columns: every split gain ties, feature 0 must win.
        points = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        labels = np.array([0, 0, 1, 1])
        model = train_rf(make_training_set(points, labels),
                         RFConfig(num_estimators=1, max_depth=1, max_features=2,
                                  bootstrap=False, seed=0))
        assert model.trees[0].feature[0] == 0

    def test_equal_gain_tie_breaks_to_lowest_threshold(self):
        # Label pattern 0,1,0,1: both clean-cut... no clean cut exists, and the
        # candidate splits at 0.5 and 2.5 have equal gain; 0.5 must win.
        points = np.array([[0.0], [1.0], [2.0], [3.0]])
        labels = np.array([0, 1, 1, 0])
        model = train_rf(make_training_set(points, labels),
                         RFConfig(num_estimators=1, max_depth=1, max_features=1,
                                  bootstrap=False, seed=0))
        tree = model.trees[0]
        assert tree.feature[0] == 0
        assert tree.threshold[0] == 0.5

    def test_reference_scale_config_builds(self, synth42):
        # The largest configuration reported for the real telemetry data.
        from nsdetect import DetectorConfig, fit_detector

        config = DetectorConfig(kind="ns-rf",
                                rf=RFConfig(num_estimators=150, max_depth=50))
        detector = fit_detector(synth42.without_labels(), config, seed=0)
        assert len(detector.model.trees) == 150
        scores = detector.score_raw(synth42.points[:100])
        assert np.all((scores >= 0) & (scores <= 1))

    def test_seeded_determinism(self):
        rng = np.random.default_rng(9)
        points, labels = random_labeled_data(rng)
        ts = make_training_set(points, labels)
        a = train_rf(ts, RFConfig(num_estimators=4, seed=10))
        b = train_rf(ts, RFConfig(num_estimators=4, seed=10))
        for ta, tb in zip(a.trees, b.trees):
            np.testing.assert_array_equal(ta.feature, tb.feature)
            np.testing.assert_array_equal(ta.threshold, tb.threshold)
            np.testing.assert_array_equal(ta.value, tb.value)

    def test_max_features_exceeding_dims_rejected(self):
        rng = np.random.default_rng(10)
        points, labels = random_labeled_data(rng)
        with pytest.raises(PreconditionError):
            train_rf(make_training_set(points, labels),
                     RFConfig(num_estimators=1, max_features=10))


class TestSerialization:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(11)
        points, labels = random_labeled_data(rng)
        model = train_rf(make_training_set(points, labels),
                         RFConfig(num_estimators=4, criterion="entropy", seed=12))
        restored = RFModel.from_json_dict(model.to_json_dict())
        for ta, tb in zip(model.trees, restored.trees):
            np.testing.assert_array_equal(ta.feature, tb.feature)
            np.testing.assert_array_equal(ta.threshold, tb.threshold)
            np.testing.assert_array_equal(ta.left, tb.left)
            np.testing.assert_array_equal(ta.right, tb.right)
            np.testing.assert_array_equal(ta.value, tb.value)
            np.testing.assert_array_equal(ta.count, tb.count)
        queries = rng.normal(size=(50, 4))
        np.testing.assert_array_equal(
            predict_rf_batch(model, queries), predict_rf_batch(restored, queries)
        )
