"""Negative-sampling anomaly detection with integrated-gradients interpretation.

Observed data is taken as the positive class; a uniform negative sample is
drawn from the delta-expanded bounding box of the positives, and a binary
classifier (random forest or dense ReLU network) learns to separate the
two. Anomalies flagged by the network are interpreted by integrating its
input gradients along the path to the nearest high-confidence normal
point.
"""

from ._backend import get_backend, set_backend, use_backend
from .attribution import (
    AnomalyInterpretation,
    BaselineSet,
    integrated_gradients,
    interpret,
    nearest_baseline,
    select_baselines,
)
from .dataset import (
    Dataset,
    Normalizer,
    denormalize,
    fit_normalizer,
    load_csv,
    normalize,
    save_csv,
)
from .datagen import SynthConfig, gen_multimodal, inject_noise_dims
from .detector import Detector, DetectorConfig, fit_detector
from .errors import (
    DataFormatError,
    NsDetectError,
    PreconditionError,
    ShapeMismatchError,
    TrainingError,
    UnsupportedCapabilityError,
)
from .evaluation import EvalReport, kfold_cv, rank_sum_test, roc_auc
from .forest import RFConfig, RFModel, impurity, predict_rf, predict_rf_batch, train_rf
from .negsample import (
    SamplingBounds,
    TrainingSet,
    build_training_set,
    compute_bounds,
    false_negative_bound,
    sample_negative,
)
from .nn import (
    NNConfig,
    NNModel,
    input_gradient,
    input_gradient_batch,
    predict_nn,
    predict_nn_batch,
    train_nn,
)

__version__ = "0.1.0"

__all__ = [
    "AnomalyInterpretation",
    "BaselineSet",
    "DataFormatError",
    "Dataset",
    "Detector",
    "DetectorConfig",
    "EvalReport",
    "NNConfig",
    "NNModel",
    "Normalizer",
    "NsDetectError",
    "PreconditionError",
    "RFConfig",
    "RFModel",
    "SamplingBounds",
    "ShapeMismatchError",
    "SynthConfig",
    "TrainingError",
    "TrainingSet",
    "UnsupportedCapabilityError",
    "build_training_set",
    "compute_bounds",
    "denormalize",
    "false_negative_bound",
    "fit_detector",
    "fit_normalizer",
    "gen_multimodal",
    "get_backend",
    "impurity",
    "inject_noise_dims",
    "input_gradient",
    "input_gradient_batch",
    "integrated_gradients",
    "interpret",
    "kfold_cv",
    "load_csv",
    "nearest_baseline",
    "normalize",
    "predict_nn",
    "predict_nn_batch",
    "predict_rf",
    "predict_rf_batch",
    "rank_sum_test",
    "roc_auc",
    "sample_negative",
    "save_csv",
    "select_baselines",
    "set_backend",
    "train_nn",
    "train_rf",
    "use_backend",
]
