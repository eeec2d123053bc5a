"""Random-forest binary classifier over the negative-sampling training set.

Trees are grown greedily with CART midpoint thresholds: at each node a
random subset of max_features candidate features is drawn, and the
(feature, threshold) pair minimizing weighted child impurity wins; ties go
to the lowest feature index, then the lowest threshold. A node becomes a
leaf on max_depth, min_samples_split, min_samples_leaf, purity, or when no
split strictly decreases impurity. Scores are the mean over trees of the
positive-class fraction in the reached leaf.

The forest is not differentiable and therefore supports detection only,
not gradient-based attribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import get_backend
from .errors import PreconditionError, ShapeMismatchError
from .negsample import TrainingSet

_CRITERIA = {"gini": 0, "entropy": 1}


def _kernels():
    if get_backend() == "numba":
        from . import _forest_numba as kernels
    else:
        from . import _forest_numpy as kernels
    return kernels


def impurity(labels, criterion: str = "gini") -> float:
    """Gini or entropy impurity of a {0, 1} label multiset (0*log 0 := 0)."""
    if criterion not in _CRITERIA:
        raise PreconditionError(f"criterion must be 'gini' or 'entropy', got {criterion!r}")
    labels = np.asarray(labels)
    if labels.size == 0:
        raise PreconditionError("impurity of an empty node is undefined")
    p = float(np.mean(labels))
    q = 1.0 - p
    if criterion == "gini":
        return 1.0 - p * p - q * q
    t1 = p * math.log2(p) if p > 0 else 0.0
    t2 = q * math.log2(q) if q > 0 else 0.0
    return -(t1 + t2)


@dataclass(frozen=True)
class RFConfig:
    num_estimators: int = 100
    criterion: str = "gini"
    max_depth: int | None = None  # None: unbounded
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: int | str = "sqrt"
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.num_estimators < 1:
            raise PreconditionError("num_estimators must be >= 1")
        if self.criterion not in _CRITERIA:
            raise PreconditionError(
                f"criterion must be 'gini' or 'entropy', got {self.criterion!r}"
            )
        if self.max_depth is not None and self.max_depth < 1:
            raise PreconditionError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise PreconditionError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise PreconditionError("min_samples_leaf must be >= 1")
        if isinstance(self.max_features, str):
            if self.max_features != "sqrt":
                raise PreconditionError(
                    f"max_features must be an integer or 'sqrt', got {self.max_features!r}"
                )
        elif self.max_features < 1:
            raise PreconditionError("max_features must be >= 1")

    def resolve_max_features(self, n_dims: int) -> int:
        if self.max_features == "sqrt":
            return max(1, int(math.sqrt(n_dims)))
        if self.max_features > n_dims:
            raise PreconditionError(
                f"max_features={self.max_features} exceeds dimensionality {n_dims}"
            )
        return int(self.max_features)

    def to_json_dict(self) -> dict:
        return {
            "num_estimators": self.num_estimators,
            "criterion": self.criterion,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RFConfig":
        return cls(**obj)


@dataclass(frozen=True)
class Tree:
    """Flat binary tree; feature == -1 marks a leaf, links are local indices."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "count": self.count.tolist(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Tree":
        return cls(
            feature=np.array(obj["feature"], dtype=np.int32),
            threshold=np.array(obj["threshold"], dtype=np.float64),
            left=np.array(obj["left"], dtype=np.int32),
            right=np.array(obj["right"], dtype=np.int32),
            value=np.array(obj["value"], dtype=np.float64),
            count=np.array(obj["count"], dtype=np.int32),
        )


@dataclass
class RFModel:
    trees: list[Tree]
    config: RFConfig
    input_dim: int
    _flat: tuple | None = field(default=None, repr=False, compare=False)

    def _flattened(self) -> tuple:
        """Concatenated node arrays with absolute child links, built once."""
        if self._flat is None:
            sizes = [t.n_nodes for t in self.trees]
            offsets = np.zeros(len(sizes) + 1, dtype=np.int64)
            np.cumsum(sizes, out=offsets[1:])
            feature = np.concatenate([t.feature for t in self.trees]).astype(np.int64)
            threshold = np.concatenate([t.threshold for t in self.trees])
            value = np.concatenate([t.value for t in self.trees])
            left = np.concatenate(
                [
                    np.where(t.left >= 0, t.left.astype(np.int64) + off, -1)
                    for t, off in zip(self.trees, offsets[:-1])
                ]
            )
            right = np.concatenate(
                [
                    np.where(t.right >= 0, t.right.astype(np.int64) + off, -1)
                    for t, off in zip(self.trees, offsets[:-1])
                ]
            )
            self._flat = (feature, threshold, left, right, value, offsets)
        return self._flat

    def predict_batch(self, points: np.ndarray) -> np.ndarray:
        return predict_rf_batch(self, points)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "input_dim": self.input_dim,
            "trees": [t.to_json_dict() for t in self.trees],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "RFModel":
        return cls(
            trees=[Tree.from_json_dict(t) for t in obj["trees"]],
            config=RFConfig.from_json_dict(obj["config"]),
            input_dim=int(obj["input_dim"]),
        )


def train_rf(data: TrainingSet, config: RFConfig) -> RFModel:
    """Grow num_estimators trees, deterministically per seed.

    Each tree gets its own bootstrap resample (when enabled) and feature
    subsampling stream, both derived from config.seed.
    """
    points = np.ascontiguousarray(data.points, dtype=np.float64)
    labels = np.asarray(data.labels, dtype=np.int64)
    n, dim = points.shape
    if np.unique(labels).size < 2:
        raise PreconditionError("training needs both classes present")
    max_features = config.resolve_max_features(dim)
    max_depth = -1 if config.max_depth is None else config.max_depth
    criterion = _CRITERIA[config.criterion]
    kernels = _kernels()

    trees = []
    tree_seqs = np.random.SeedSequence(config.seed).spawn(config.num_estimators)
    for seq in tree_seqs:
        boot_seq, feat_seq = seq.spawn(2)
        if config.bootstrap:
            rng = np.random.default_rng(boot_seq)
            sample_idx = rng.integers(0, n, size=n, dtype=np.int64)
        else:
            sample_idx = np.arange(n, dtype=np.int64)
        feat_seed = feat_seq.generate_state(1, dtype=np.uint64)[0]
        arrays = kernels.grow_tree(
            points,
            labels,
            sample_idx,
            max_depth,
            config.min_samples_split,
            config.min_samples_leaf,
            max_features,
            criterion,
            feat_seed,
        )
        trees.append(Tree(*arrays))
    return RFModel(trees=trees, config=config, input_dim=dim)


def _check_points(model: RFModel, points: np.ndarray) -> np.ndarray:
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(1, -1)
    if points.ndim != 2 or points.shape[1] != model.input_dim:
        raise ShapeMismatchError(
            f"model expects {model.input_dim}-dimensional points, got shape "
            f"{np.asarray(points).shape}"
        )
    return points


def predict_rf_batch(model: RFModel, points: np.ndarray) -> np.ndarray:
    """Mean leaf positive-class fraction over trees, one score per row."""
    points = _check_points(model, points)
    feature, threshold, left, right, value, offsets = model._flattened()
    return _kernels().forest_apply(
        points, feature, threshold, left, right, value, offsets
    )


def predict_rf(model: RFModel, point: np.ndarray) -> float:
    """Score one D-vector in [0, 1]; routing rule: left iff x_d <= threshold."""
    point = np.asarray(point, dtype=np.float64)
    if point.ndim != 1:
        raise ShapeMismatchError(f"expected a 1-d point, got shape {point.shape}")
    return float(predict_rf_batch(model, point.reshape(1, -1))[0])
