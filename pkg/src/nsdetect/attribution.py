"""Anomaly interpretation against a nearest-normal baseline.

The baseline set holds the training positives the classifier scores at or
above 1 - epsilon. For a query point, the nearest baseline by Euclidean
distance (in normalized space) anchors a straight-line path, and the
per-dimension blame is the path integral of the input gradient scaled by
the displacement (midpoint Riemann sum with k steps). Blames sum to
F(nearest baseline) - F(query) up to quadrature error; that residual is
always computed and reported, never assumed.

Only gradient-capable models (the neural network) support attribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Normalizer, _frozen_array
from .errors import PreconditionError, ShapeMismatchError, UnsupportedCapabilityError


@dataclass(frozen=True)
class BaselineSet:
    """Training positives with classifier score >= 1 - epsilon."""

    points: np.ndarray
    scores: np.ndarray
    epsilon: float
    indices: np.ndarray  # row numbers in the positive sample the points came from

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_array(self.points, ndim=2))
        object.__setattr__(self, "scores", _frozen_array(self.scores, ndim=1))
        object.__setattr__(
            self, "indices", _frozen_array(self.indices, dtype=np.int64, ndim=1)
        )
        if self.points.shape[0] == 0:
            raise PreconditionError("baseline set must be non-empty")
        if self.points.shape[0] != self.scores.shape[0]:
            raise ShapeMismatchError("scores must align with baseline points")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "scores": self.scores.tolist(),
            "epsilon": self.epsilon,
            "indices": self.indices.tolist(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "BaselineSet":
        return cls(
            points=np.array(obj["points"], dtype=np.float64),
            scores=np.array(obj["scores"], dtype=np.float64),
            epsilon=float(obj["epsilon"]),
            indices=np.array(obj["indices"], dtype=np.int64),
        )


@dataclass(frozen=True)
class AnomalyInterpretation:
    """Attribution result for one query point, raw-unit values included."""

    score: float
    baseline_normalized: np.ndarray
    baseline_raw: np.ndarray
    observed_raw: np.ndarray
    blames: np.ndarray
    completeness_residual: float
    k: int
    distance: float
    dim_names: tuple[str, ...]

    def to_report_dict(self) -> dict:
        """Report layout: blame entries sorted descending by |blame|."""
        order = np.argsort(-np.abs(self.blames), kind="stable")
        return {
            "score": self.score,
            "expected_normal": {
                name: float(v) for name, v in zip(self.dim_names, self.baseline_raw)
            },
            "observed": {
                name: float(v) for name, v in zip(self.dim_names, self.observed_raw)
            },
            "blame": {self.dim_names[i]: float(self.blames[i]) for i in order},
            "completeness_residual": self.completeness_residual,
            "distance": self.distance,
        }


def _require_gradients(model) -> None:
    if not (hasattr(model, "input_gradients") and hasattr(model, "predict_batch")):
        raise UnsupportedCapabilityError(
            f"{type(model).__name__} does not expose input gradients; "
            "attribution needs the differentiable (neural network) detector"
        )


def select_baselines(model, positive: Dataset, epsilon: float) -> BaselineSet:
    """All training positives scoring >= 1 - epsilon, in input order.

    `positive` must already be normalized with the model's normalizer.
    """
    if not 0.0 < epsilon < 1.0:
        raise PreconditionError(f"epsilon must be in (0, 1), got {epsilon}")
    scores = model.predict_batch(positive.points)
    keep = scores >= 1.0 - epsilon
    if not keep.any():
        raise PreconditionError(
            f"no training point scores >= {1.0 - epsilon}; increase epsilon so the "
            "baseline set covers the high-confidence normal regions"
        )
    return BaselineSet(
        points=positive.points[keep],
        scores=scores[keep],
        epsilon=float(epsilon),
        indices=np.nonzero(keep)[0],
    )


def nearest_baseline(x: np.ndarray, baselines: BaselineSet) -> tuple[np.ndarray, float]:
    """Baseline minimizing Euclidean distance to x; ties go to the lowest index."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != baselines.points.shape[1]:
        raise ShapeMismatchError(
            f"query must be a {baselines.points.shape[1]}-vector, got shape {x.shape}"
        )
    sq_dists = np.sum((baselines.points - x) ** 2, axis=1)
    best = int(np.argmin(sq_dists))
    return baselines.points[best].copy(), float(np.sqrt(sq_dists[best]))


def integrated_gradients(model, x: np.ndarray, u_star: np.ndarray, k: int) -> np.ndarray:
    """Per-dimension blame along the straight-line path from x to u_star.

    Midpoint Riemann approximation with k steps of
    (u*_d - x_d) * integral over the path of dF/dx_d.
    """
    _require_gradients(model)
    if k < 1:
        raise PreconditionError(f"step count k must be >= 1, got {k}")
    x = np.asarray(x, dtype=np.float64)
    u_star = np.asarray(u_star, dtype=np.float64)
    if x.shape != u_star.shape or x.ndim != 1:
        raise ShapeMismatchError(
            f"x and u_star must be equal-length vectors, got {x.shape} and {u_star.shape}"
        )
    displacement = u_star - x
    alphas = (np.arange(k) + 0.5) / k
    path = x + alphas[:, None] * displacement
    grads = model.input_gradients(path)
    return displacement * grads.mean(axis=0)


def interpret(
    model,
    baselines: BaselineSet,
    x_raw: np.ndarray,
    k: int,
    normalizer: Normalizer,
) -> AnomalyInterpretation:
    """Full interpretation of one raw-unit query point.

    Normalizes the query, finds the nearest baseline, integrates gradients,
    and reports blames plus the completeness residual
    |sum(blames) - (F(u*) - F(x))|. The baseline is also denormalized into
    raw units as the expected values of the nearest normal.
    """
    _require_gradients(model)
    x_raw = np.asarray(x_raw, dtype=np.float64)
    x = normalizer.transform(x_raw)
    score = float(model.predict_batch(x.reshape(1, -1))[0])
    u_star, distance = nearest_baseline(x, baselines)
    blames = integrated_gradients(model, x, u_star, k)
    score_baseline = float(model.predict_batch(u_star.reshape(1, -1))[0])
    residual = abs(float(blames.sum()) - (score_baseline - score))
    return AnomalyInterpretation(
        score=score,
        baseline_normalized=u_star,
        baseline_raw=normalizer.inverse(u_star),
        observed_raw=x_raw,
        blames=blames,
        completeness_residual=residual,
        k=int(k),
        distance=distance,
        dim_names=tuple(normalizer.dim_names),
    )
