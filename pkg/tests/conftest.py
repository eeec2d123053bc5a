import numpy as np
import pytest

from nsdetect import (
    DetectorConfig,
    SamplingBounds,
    SynthConfig,
    TrainingSet,
    fit_detector,
    gen_multimodal,
    normalize,
    select_baselines,
)


def make_training_set(points, labels, seed=0):
    """Wrap labeled points in a TrainingSet for direct classifier tests."""
    points = np.asarray(points, dtype=np.float64)
    bounds = SamplingBounds(points.min(axis=0), points.max(axis=0), 0.0)
    names = tuple(f"x{d:03d}" for d in range(points.shape[1]))
    return TrainingSet(points, np.asarray(labels), names, 1.0, bounds, seed)


def blob_training_set(n_per_class=200, seed=0):
    """Two well-separated 2-d Gaussian blobs, labels 0 and 1."""
    rng = np.random.default_rng(seed)
    low = rng.normal([0.2, 0.2], 0.05, (n_per_class, 2))
    high = rng.normal([0.8, 0.8], 0.05, (n_per_class, 2))
    points = np.vstack([low, high])
    labels = np.concatenate(
        [np.zeros(n_per_class, dtype=int), np.ones(n_per_class, dtype=int)]
    )
    return make_training_set(points, labels, seed)


@pytest.fixture(scope="session")
def synth42():
    """The two-mode 16-d synthetic set: 2,500 normals + 125 uniform anomalies."""
    return gen_multimodal(SynthConfig(seed=42))


@pytest.fixture(scope="session")
def nn_detector(synth42):
    """NS-NN fitted on the synthetic set with its reference hyperparameters
    (2 hidden layers, width 64, dropout 0.1, 100 epochs, ratio 2.0, delta 0.05)."""
    return fit_detector(synth42.without_labels(), DetectorConfig(kind="ns-nn"), seed=7)


@pytest.fixture(scope="session")
def nn_baselines(nn_detector, synth42):
    positive_n = normalize(nn_detector.normalizer, synth42.without_labels())
    return select_baselines(nn_detector.model, positive_n, epsilon=0.01)
