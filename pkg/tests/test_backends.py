"""The numba kernels and the pure-numpy fallback must grow the same forest."""

import numpy as np
import pytest

from nsdetect import RFConfig, predict_rf_batch, train_rf, use_backend
from nsdetect._backend import get_backend, set_backend

from conftest import make_training_set

numba_available = pytest.importorskip("numba", reason="numba not installed")


def labeled_blobs(n=300, dims=6, seed=0):
    rng = np.random.default_rng(seed)
    points = rng.normal(size=(n, dims))
    labels = (points[:, 0] + points[:, 1] > 0).astype(int)
    labels[:3] = [0, 1, 0]
    return make_training_set(points, labels)


def assert_forests_equal(a, b):
    assert len(a.trees) == len(b.trees)
    for ta, tb in zip(a.trees, b.trees):
        np.testing.assert_array_equal(ta.feature, tb.feature)
        np.testing.assert_array_equal(ta.threshold, tb.threshold)
        np.testing.assert_array_equal(ta.left, tb.left)
        np.testing.assert_array_equal(ta.right, tb.right)
        np.testing.assert_array_equal(ta.value, tb.value)
        np.testing.assert_array_equal(ta.count, tb.count)


class TestBackendParity:
    def test_gini_forests_bit_identical(self):
        ts = labeled_blobs()
        config = RFConfig(num_estimators=8, max_depth=12, seed=5)
        with use_backend("numba"):
            fast = train_rf(ts, config)
        with use_backend("numpy"):
            slow = train_rf(ts, config)
        assert_forests_equal(fast, slow)

    def test_entropy_forests_match_on_reference_data(self):
        # Not guaranteed in general (1-ulp log2 divergence); pinned by seed.
        ts = labeled_blobs(seed=1)
        config = RFConfig(num_estimators=6, criterion="entropy", max_depth=10, seed=6)
        with use_backend("numba"):
            fast = train_rf(ts, config)
        with use_backend("numpy"):
            slow = train_rf(ts, config)
        assert_forests_equal(fast, slow)

    def test_predictions_identical_across_backends(self):
        ts = labeled_blobs(seed=2)
        config = RFConfig(num_estimators=5, max_depth=8, seed=7)
        with use_backend("numba"):
            model = train_rf(ts, config)
            fast_scores = predict_rf_batch(model, ts.points)
        with use_backend("numpy"):
            slow_scores = predict_rf_batch(model, ts.points)
        np.testing.assert_array_equal(fast_scores, slow_scores)

    def test_unbounded_depth_parity(self):
        ts = labeled_blobs(n=150, seed=3)
        config = RFConfig(num_estimators=4, max_depth=None, seed=8)
        with use_backend("numba"):
            fast = train_rf(ts, config)
        with use_backend("numpy"):
            slow = train_rf(ts, config)
        assert_forests_equal(fast, slow)


class TestBackendSelection:
    def test_invalid_backend_rejected(self):
        with pytest.raises(ValueError):
            set_backend("cuda")

    def test_use_backend_restores(self):
        before = get_backend()
        with use_backend("numpy"):
            assert get_backend() == "numpy"
        assert get_backend() == before
