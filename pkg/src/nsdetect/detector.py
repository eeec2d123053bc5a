"""End-to-end negative-sampling detector: normalize, sample, train, score.

A fitted detector bundles the min-max normalizer (fitted on the training
positives) with either classifier, so raw-unit points can be scored
directly. One integer seed is fanned out deterministically to the negative
sampler and the classifier.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Normalizer, fit_normalizer, normalize
from .errors import PreconditionError
from .forest import RFConfig, RFModel, train_rf
from .negsample import build_training_set
from .nn import NNConfig, NNModel, train_nn

KIND_NN = "ns-nn"
KIND_RF = "ns-rf"


def derive_seeds(seed: int, n: int) -> list[int]:
    """Deterministic sub-seeds fanned out from one master seed."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


@dataclass(frozen=True)
class DetectorConfig:
    kind: str = KIND_NN
    sample_ratio: float = 2.0
    delta: float = 0.05
    nn: NNConfig = NNConfig()
    rf: RFConfig = RFConfig()

    def __post_init__(self):
        if self.kind not in (KIND_NN, KIND_RF):
            raise PreconditionError(
                f"detector kind must be {KIND_NN!r} or {KIND_RF!r}, got {self.kind!r}"
            )
        if self.sample_ratio <= 0:
            raise PreconditionError("sample_ratio must be positive")
        if self.delta < 0:
            raise PreconditionError("delta must be non-negative")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sample_ratio": self.sample_ratio,
            "delta": self.delta,
            "nn": self.nn.to_json_dict(),
            "rf": self.rf.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DetectorConfig":
        return cls(
            kind=obj["kind"],
            sample_ratio=obj["sample_ratio"],
            delta=obj["delta"],
            nn=NNConfig.from_json_dict(obj["nn"]),
            rf=RFConfig.from_json_dict(obj["rf"]),
        )


@dataclass
class Detector:
    """Fitted negative-sampling detector (normalizer + classifier)."""

    kind: str
    model: NNModel | RFModel
    normalizer: Normalizer
    dim_names: tuple[str, ...]
    config: DetectorConfig

    def score_normalized(self, points: np.ndarray) -> np.ndarray:
        return self.model.predict_batch(points)

    def score_raw(self, points: np.ndarray) -> np.ndarray:
        return self.model.predict_batch(self.normalizer.transform(points))


def fit_detector(positive: Dataset, config: DetectorConfig, seed: int) -> Detector:
    """Fit on the observed sample only; any labels on `positive` are ignored."""
    norm = fit_normalizer(positive)
    positive_n = normalize(norm, positive.without_labels())
    neg_seed, clf_seed = derive_seeds(seed, 2)
    training = build_training_set(positive_n, config.sample_ratio, config.delta, neg_seed)
    if config.kind == KIND_NN:
        model = train_nn(training, dataclasses.replace(config.nn, seed=clf_seed))
    else:
        model = train_rf(training, dataclasses.replace(config.rf, seed=clf_seed))
    return Detector(
        kind=config.kind,
        model=model,
        normalizer=norm,
        dim_names=positive.dim_names,
        config=config,
    )
