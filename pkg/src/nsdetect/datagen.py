"""Synthetic multimodal Gaussian datasets with uniform true anomalies.

Normal points are split evenly across isotropic Gaussian modes (1 mode:
origin; 2 modes: +m and -m on every dimension; 3 modes: both plus the
origin). Anomalies are drawn uniformly over the bounding box of the
generated normal sample, so they can overlap normal regions. Normal points
are labeled 1 and anomalies 0. Optionally a fraction of dimensions is
replaced with uniform noise to probe detector robustness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import PreconditionError


@dataclass(frozen=True)
class SynthConfig:
    dims: int = 16
    num_modes: int = 2
    mode_magnitude: float = 2.4
    sigma: float = math.sqrt(0.5)  # isotropic std, i.e. covariance 0.5 * I
    n_normal: int = 2500
    anomaly_fraction: float = 0.05
    noise_dim_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.dims < 1:
            raise PreconditionError("dims must be >= 1")
        if not 1 <= self.num_modes <= 3:
            raise PreconditionError(
                f"mode layout is defined for 1-3 modes, got {self.num_modes}"
            )
        if self.sigma <= 0:
            raise PreconditionError("sigma must be positive")
        if self.n_normal < 1:
            raise PreconditionError("n_normal must be >= 1")
        if not 0.0 <= self.anomaly_fraction < 1.0:
            raise PreconditionError("anomaly_fraction must be in [0, 1)")
        if not 0.0 <= self.noise_dim_fraction < 1.0:
            raise PreconditionError("noise_dim_fraction must be in [0, 1)")

    def to_json_dict(self) -> dict:
        return {
            "dims": self.dims,
            "num_modes": self.num_modes,
            "mode_magnitude": self.mode_magnitude,
            "sigma": self.sigma,
            "n_normal": self.n_normal,
            "anomaly_fraction": self.anomaly_fraction,
            "noise_dim_fraction": self.noise_dim_fraction,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SynthConfig":
        return cls(**obj)


def mode_centers(config: SynthConfig) -> np.ndarray:
    """Mode centers as rows: +m, -m, then the origin for a third mode."""
    m = config.mode_magnitude
    ones = np.ones(config.dims)
    if config.num_modes == 1:
        return np.zeros((1, config.dims))
    if config.num_modes == 2:
        return np.stack([m * ones, -m * ones])
    return np.stack([m * ones, -m * ones, np.zeros(config.dims)])


def gen_multimodal(config: SynthConfig) -> Dataset:
    """Labeled dataset: even per-mode Gaussians (label 1) plus
    ceil(anomaly_fraction * n_normal) uniform anomalies (label 0)."""
    rng = np.random.default_rng(config.seed)
    centers = mode_centers(config)
    k = centers.shape[0]
    counts = [config.n_normal // k] * k
    for i in range(config.n_normal % k):
        counts[i] += 1

    blocks = [
        center + config.sigma * rng.standard_normal((cnt, config.dims))
        for center, cnt in zip(centers, counts)
    ]
    normal = np.concatenate(blocks, axis=0)

    n_anom = math.ceil(config.anomaly_fraction * config.n_normal)
    if n_anom > 0:
        lo = normal.min(axis=0)
        hi = normal.max(axis=0)
        anomalies = rng.uniform(lo, hi, size=(n_anom, config.dims))
        points = np.concatenate([normal, anomalies], axis=0)
    else:
        points = normal
    labels = np.concatenate(
        [np.ones(config.n_normal, dtype=np.int64), np.zeros(n_anom, dtype=np.int64)]
    )
    dim_names = tuple(f"x{d:03d}" for d in range(config.dims))
    data = Dataset(points, dim_names, labels)

    if config.noise_dim_fraction > 0.0:
        noise_seed = int(np.random.SeedSequence(config.seed).spawn(1)[0].generate_state(1)[0])
        data = inject_noise_dims(data, config.noise_dim_fraction, noise_seed)
    return data


def inject_noise_dims(data: Dataset, fraction: float, seed: int) -> Dataset:
    """Replace round(fraction * D) seed-chosen dimensions with uniform noise
    over each dimension's original range; labels are untouched."""
    if not 0.0 <= fraction < 1.0:
        raise PreconditionError(f"noise fraction must be in [0, 1), got {fraction}")
    n_replace = round(fraction * data.n_dims)
    if n_replace == 0:
        return data
    rng = np.random.default_rng(seed)
    dims = rng.choice(data.n_dims, size=n_replace, replace=False)
    points = data.points.copy()
    for d in dims:
        lo = points[:, d].min()
        hi = points[:, d].max()
        points[:, d] = rng.uniform(lo, hi, size=data.n_points)
    return Dataset(points, data.dim_names, data.labels)
