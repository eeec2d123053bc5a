import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsdetect import (
    Dataset,
    DetectorConfig,
    NNConfig,
    PreconditionError,
    RFConfig,
    SynthConfig,
    gen_multimodal,
    kfold_cv,
    rank_sum_test,
    roc_auc,
)
from nsdetect.evaluation import stratified_fold_indices


def pairwise_auc(scores, labels):
    """O(n^2) oracle: count positive-over-negative wins, ties as 1/2."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestRocAuc:
    def test_perfect_ranking(self):
        assert roc_auc([0.1, 0.9], [0, 1]) == 1.0

    def test_all_tie(self):
        assert roc_auc([0.5, 0.5], [0, 1]) == 0.5

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(10, 200))
            # Quantized scores force plenty of ties.
            scores = np.round(rng.random(n), 2)
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            assert roc_auc(scores, labels) == pytest.approx(
                pairwise_auc(scores, labels), abs=1e-12
            )

    def test_single_class_rejected(self):
        with pytest.raises(PreconditionError):
            roc_auc([0.1, 0.9], [1, 1])

    @settings(max_examples=50, deadline=None)
    @given(
        # Quantized so 1 - s keeps the ordering exactly in float64.
        st.lists(st.floats(0, 1).map(lambda v: round(v, 6)), min_size=4, max_size=30),
        st.data(),
    )
    def test_complement_symmetry(self, scores, data):
        n = len(scores)
        labels = data.draw(
            st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(
                lambda ls: 0 < sum(ls) < n
            )
        )
        scores = np.array(scores)
        labels = np.array(labels)
        direct = roc_auc(scores, labels)
        flipped = roc_auc(1.0 - scores, 1 - labels)
        assert direct == pytest.approx(flipped, abs=1e-12)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(1)
        scores = rng.random(100)
        labels = rng.integers(0, 2, 100)
        labels[0], labels[1] = 0, 1
        base = roc_auc(scores, labels)
        assert roc_auc(np.exp(3 * scores), labels) == pytest.approx(base, abs=1e-12)
        assert roc_auc(scores**3, labels) == pytest.approx(base, abs=1e-12)


class TestRankSumTest:
    def test_identical_lists(self):
        values = list(np.linspace(0.8, 0.95, 10))
        assert rank_sum_test(values, values) == pytest.approx(1.0, abs=0.02)

    def test_fully_separated(self):
        p = rank_sum_test([1.0] * 10, [0.0] * 10)
        assert p < 0.001

    def test_constant_equal_samples(self):
        assert rank_sum_test([0.5] * 5, [0.5] * 5) == 1.0

    def test_null_calibration(self):
        rng = np.random.default_rng(2)
        above = 0
        for _ in range(100):
            a = rng.normal(size=20)
            b = rng.normal(size=20)
            if rank_sum_test(a, b) > 0.05:
                above += 1
        assert above >= 90

    def test_empty_rejected(self):
        with pytest.raises(PreconditionError):
            rank_sum_test([], [1.0])


class TestStratifiedFolds:
    def test_class_proportions_preserved(self):
        rng = np.random.default_rng(3)
        labels = np.array([1] * 900 + [0] * 100)
        folds = stratified_fold_indices(labels, 5, rng)
        overall = 0.1
        for fold in folds:
            frac = np.mean(labels[fold] == 0)
            assert abs(frac - overall) <= 0.01

    def test_partition_is_exact(self):
        rng = np.random.default_rng(4)
        labels = np.array([1] * 37 + [0] * 13)
        folds = stratified_fold_indices(labels, 5, rng)
        joined = np.sort(np.concatenate(folds))
        np.testing.assert_array_equal(joined, np.arange(50))

    def test_infeasible_fold_count(self):
        rng = np.random.default_rng(5)
        labels = np.array([1] * 20 + [0] * 3)
        with pytest.raises(PreconditionError):
            stratified_fold_indices(labels, 5, rng)


@pytest.fixture(scope="module")
def small_data():
    return gen_multimodal(SynthConfig(dims=4, n_normal=200,
                                      anomaly_fraction=0.1, seed=6))


class TestKfoldCv:
    def test_trials_times_folds_values(self, small_data):
        config = DetectorConfig(kind="ns-rf", rf=RFConfig(num_estimators=5, max_depth=8))
        report = kfold_cv(small_data, config, folds=5, trials=4, seed=0)
        assert report.aucs.shape == (4, 5)
        assert report.aucs.size == 20
        assert np.all((report.aucs >= 0) & (report.aucs <= 1))

    def test_deterministic_rerun(self, small_data):
        config = DetectorConfig(kind="ns-rf", rf=RFConfig(num_estimators=5, max_depth=8))
        a = kfold_cv(small_data, config, folds=3, trials=2, seed=1)
        b = kfold_cv(small_data, config, folds=3, trials=2, seed=1)
        np.testing.assert_array_equal(a.aucs, b.aucs)

    def test_detects_separated_anomalies(self, small_data):
        config = DetectorConfig(
            kind="ns-nn",
            nn=NNConfig(num_hidden_layers=1, layer_width=16, epochs=30,
                        learning_rate=0.01),
        )
        report = kfold_cv(small_data, config, folds=3, trials=1, seed=2)
        assert report.mean_auc > 0.8

    def test_unlabeled_data_rejected(self):
        data = Dataset(np.random.default_rng(0).normal(size=(30, 2)), ("a", "b"))
        config = DetectorConfig(kind="ns-rf", rf=RFConfig(num_estimators=2))
        with pytest.raises(PreconditionError):
            kfold_cv(data, config, folds=2, trials=1, seed=0)

    def test_report_format(self, small_data):
        config = DetectorConfig(kind="ns-rf", rf=RFConfig(num_estimators=3, max_depth=5))
        report = kfold_cv(small_data, config, folds=2, trials=1, seed=3,
                          dataset_name="synth-small")
        table = report.format_table()
        assert "synth-small" in table
        assert "±" in table
        payload = report.to_json_dict()
        assert payload["mean_pct"] == pytest.approx(100 * report.mean_auc)
        assert len(payload["aucs"]) == 1
        assert report.wall_seconds > 0
