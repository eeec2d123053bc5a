"""Uniform negative sampling over the delta-expanded bounding hypercube.

The positive (observed) sample is labeled 1; a negative sample of
round(sample_ratio * M) points is drawn uniformly i.i.d. from the box
spanning the positive extrema expanded by delta on each side, and labeled
0. No rejection is applied to negatives that land inside positive regions:
in high dimension the in-region probability decays as the product of
per-dimension length ratios, which false_negative_bound computes.

All sampling happens in normalized space; delta is in normalized units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, _frozen_array
from .errors import PreconditionError, ShapeMismatchError


@dataclass(frozen=True)
class SamplingBounds:
    """Per-dimension sampling interval [min(U_d) - delta, max(U_d) + delta]."""

    lower: np.ndarray
    upper: np.ndarray
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "lower", _frozen_array(self.lower, ndim=1))
        object.__setattr__(self, "upper", _frozen_array(self.upper, ndim=1))
        object.__setattr__(self, "delta", float(self.delta))
        if self.lower.shape != self.upper.shape:
            raise ShapeMismatchError("lower and upper must have equal length")
        if self.delta < 0:
            raise PreconditionError(f"delta must be non-negative, got {self.delta}")
        if np.any(self.upper < self.lower):
            raise PreconditionError("upper < lower in sampling bounds")

    @property
    def n_dims(self) -> int:
        return self.lower.shape[0]

    @property
    def negative_widths(self) -> np.ndarray:
        """Per-dimension length of the sampling box."""
        return self.upper - self.lower

    @property
    def positive_widths(self) -> np.ndarray:
        """Per-dimension extent of the positive sample the box was built from."""
        return self.negative_widths - 2.0 * self.delta

    def to_json_dict(self) -> dict:
        return {
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "delta": self.delta,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SamplingBounds":
        return cls(
            lower=np.array(obj["lower"], dtype=np.float64),
            upper=np.array(obj["upper"], dtype=np.float64),
            delta=obj["delta"],
        )


@dataclass(frozen=True)
class TrainingSet:
    """Positive sample (label 1) followed by uniform negatives (label 0)."""

    points: np.ndarray
    labels: np.ndarray
    dim_names: tuple[str, ...]
    sample_ratio: float
    bounds: SamplingBounds
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_array(self.points, ndim=2))
        object.__setattr__(
            self, "labels", _frozen_array(self.labels, dtype=np.int64, ndim=1)
        )
        object.__setattr__(self, "dim_names", tuple(self.dim_names))

    @property
    def n_positive(self) -> int:
        return int(np.sum(self.labels == 1))

    @property
    def n_negative(self) -> int:
        return int(np.sum(self.labels == 0))

    @property
    def n_dims(self) -> int:
        return self.points.shape[1]


def compute_bounds(positive: Dataset, delta: float) -> SamplingBounds:
    """Per-dimension positive extrema expanded by delta on each side."""
    if positive.n_points == 0:
        raise PreconditionError("cannot compute bounds of an empty dataset")
    if delta < 0:
        raise PreconditionError(f"delta must be non-negative, got {delta}")
    return SamplingBounds(
        lower=positive.points.min(axis=0) - delta,
        upper=positive.points.max(axis=0) + delta,
        delta=delta,
    )


def sample_negative(
    bounds: SamplingBounds,
    n: int,
    seed: int,
    dim_names: tuple[str, ...] | None = None,
) -> Dataset:
    """Draw n points uniformly i.i.d. from the sampling box, deterministically."""
    if n < 1:
        raise PreconditionError(f"need at least 1 negative point, got n={n}")
    rng = np.random.default_rng(seed)
    points = rng.uniform(bounds.lower, bounds.upper, size=(n, bounds.n_dims))
    if dim_names is None:
        dim_names = tuple(f"x{d:03d}" for d in range(bounds.n_dims))
    return Dataset(points, dim_names)


def build_training_set(
    positive: Dataset, sample_ratio: float, delta: float, seed: int
) -> TrainingSet:
    """Concatenate the positive sample (label 1) with fresh negatives (label 0).

    The caller is expected to pass an already-normalized positive sample.
    The negative count is round(sample_ratio * M); the entire positive
    sample is kept and labeled 1, real contamination included.
    """
    if sample_ratio <= 0:
        raise PreconditionError(f"sample_ratio must be positive, got {sample_ratio}")
    bounds = compute_bounds(positive, delta)
    n_neg = round(sample_ratio * positive.n_points)
    negatives = sample_negative(bounds, n_neg, seed, positive.dim_names)
    points = np.concatenate([positive.points, negatives.points], axis=0)
    labels = np.concatenate(
        [np.ones(positive.n_points, dtype=np.int64), np.zeros(n_neg, dtype=np.int64)]
    )
    return TrainingSet(
        points=points,
        labels=labels,
        dim_names=positive.dim_names,
        sample_ratio=float(sample_ratio),
        bounds=bounds,
        seed=int(seed),
    )


def false_negative_bound(bounds: SamplingBounds) -> float:
    """Upper bound on P(negative point lands in the normal region).

    Product over dimensions of positive-width / sampling-width; decays
    exponentially with dimensionality for any fixed per-dimension ratio < 1.
    """
    widths_neg = bounds.negative_widths
    if np.any(widths_neg <= 0):
        raise PreconditionError("all sampling widths must be positive")
    return float(np.prod(bounds.positive_widths / widths_neg))
