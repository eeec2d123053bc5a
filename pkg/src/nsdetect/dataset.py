"""Data model, CSV ingestion, and min-max normalization.

A Dataset is an ordered, immutable collection of D-dimensional points with
named dimensions and optional {0, 1} ground-truth labels (0 = anomalous,
1 = normal). A Normalizer is a per-dimension affine min-max transform
fitted on the positive sample; it maps raw units to the unit interval and
back. Points outside the fitted extrema are never clipped: prediction-time
values may legitimately fall outside [0, 1].
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, PreconditionError, ShapeMismatchError

DEFAULT_LABEL_COLUMN = "class_label"


def _frozen_array(values, dtype=np.float64, ndim=None) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise ShapeMismatchError(f"expected {ndim}-d array, got {arr.ndim}-d")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Ordered collection of D-dimensional points, immutable once built."""

    points: np.ndarray
    dim_names: tuple[str, ...]
    labels: np.ndarray | None = None

    def __post_init__(self):
        points = _frozen_array(self.points, ndim=2)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "dim_names", tuple(self.dim_names))
        if points.shape[1] != len(self.dim_names):
            raise ShapeMismatchError(
                f"{points.shape[1]} columns but {len(self.dim_names)} dimension names"
            )
        if points.shape[1] == 0:
            raise PreconditionError("dataset needs at least one dimension")
        if len(set(self.dim_names)) != len(self.dim_names):
            raise DataFormatError("dimension names must be unique")
        if not np.all(np.isfinite(points)):
            raise DataFormatError("points must be finite (no NaN or infinity)")
        if self.labels is not None:
            labels = _frozen_array(self.labels, dtype=np.int64, ndim=1)
            object.__setattr__(self, "labels", labels)
            if labels.shape[0] != points.shape[0]:
                raise ShapeMismatchError(
                    f"{labels.shape[0]} labels for {points.shape[0]} points"
                )
            if not np.all((labels == 0) | (labels == 1)):
                raise DataFormatError("labels must be 0 or 1")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def n_dims(self) -> int:
        return self.points.shape[1]

    def without_labels(self) -> "Dataset":
        if self.labels is None:
            return self
        return Dataset(self.points, self.dim_names, None)

    def select(self, indices) -> "Dataset":
        """Row subset (order given by `indices`), labels carried along."""
        labels = None if self.labels is None else self.labels[indices]
        return Dataset(self.points[indices], self.dim_names, labels)


@dataclass(frozen=True)
class Normalizer:
    """Per-dimension min-max transform fitted on the positive sample.

    Degenerate (zero-range) dimensions normalize to 0.0 and denormalize to
    their fitted minimum, so constant sensor channels do not abort a run.
    """

    mins: np.ndarray
    maxs: np.ndarray
    dim_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "mins", _frozen_array(self.mins, ndim=1))
        object.__setattr__(self, "maxs", _frozen_array(self.maxs, ndim=1))
        object.__setattr__(self, "dim_names", tuple(self.dim_names))
        if self.mins.shape != self.maxs.shape:
            raise ShapeMismatchError("mins and maxs must have equal length")
        if np.any(self.maxs < self.mins):
            raise PreconditionError("max < min in normalizer bounds")

    @property
    def n_dims(self) -> int:
        return self.mins.shape[0]

    @property
    def degenerate(self) -> np.ndarray:
        """Boolean mask of zero-range dimensions."""
        return self.maxs == self.mins

    def _check_dims(self, arr: np.ndarray) -> None:
        if arr.shape[-1] != self.n_dims:
            raise ShapeMismatchError(
                f"normalizer has {self.n_dims} dimensions, data has {arr.shape[-1]}"
            )

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Map raw values to unit space; no clipping outside [0, 1]."""
        points = np.asarray(points, dtype=np.float64)
        self._check_dims(points)
        span = self.maxs - self.mins
        safe_span = np.where(self.degenerate, 1.0, span)
        out = (points - self.mins) / safe_span
        if np.any(self.degenerate):
            out = np.where(self.degenerate, 0.0, out)
        return out

    def inverse(self, points: np.ndarray) -> np.ndarray:
        """Map unit-space values back to raw units (degenerate dims -> min)."""
        points = np.asarray(points, dtype=np.float64)
        self._check_dims(points)
        span = self.maxs - self.mins
        out = points * span + self.mins
        if np.any(self.degenerate):
            out = np.where(self.degenerate, self.mins, out)
        return out

    def to_json_dict(self) -> dict:
        return {
            "mins": self.mins.tolist(),
            "maxs": self.maxs.tolist(),
            "dim_names": list(self.dim_names),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "Normalizer":
        return cls(
            mins=np.array(obj["mins"], dtype=np.float64),
            maxs=np.array(obj["maxs"], dtype=np.float64),
            dim_names=tuple(obj["dim_names"]),
        )


def load_csv(path, label_column: str | None = None) -> Dataset:
    """Load a numeric CSV (UTF-8, comma-separated, header row) into a Dataset.

    When `label_column` names a header column, that column is parsed as
    {0, 1} labels; when None, the Dataset has no labels. Row order is
    preserved. Parse failures name the offending row and column.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, expected a header row")
        header = [name.strip() for name in header]
        label_idx = None
        if label_column is not None:
            if label_column not in header:
                raise DataFormatError(
                    f"{path}: label column {label_column!r} not in header {header}"
                )
            label_idx = header.index(label_column)
        dim_names = tuple(n for i, n in enumerate(header) if i != label_idx)

        rows: list[list[float]] = []
        labels: list[int] = []
        for row_num, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}"
                )
            values = []
            for col_idx, cell in enumerate(row):
                if col_idx == label_idx:
                    cell = cell.strip()
                    if cell not in ("0", "1"):
                        raise DataFormatError(
                            f"{path}: row {row_num}, column {header[col_idx]!r}: "
                            f"label must be 0 or 1, got {cell!r}"
                        )
                    labels.append(int(cell))
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: row {row_num}, column {header[col_idx]!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
            rows.append(values)

    points = np.array(rows, dtype=np.float64).reshape(len(rows), len(dim_names))
    return Dataset(points, dim_names, np.array(labels) if label_idx is not None else None)


def to_csv_text(data: Dataset, label_column: str = DEFAULT_LABEL_COLUMN) -> str:
    """Render a Dataset as CSV text; floats use shortest round-trip formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(data.dim_names)
    if data.labels is not None:
        header.append(label_column)
    writer.writerow(header)
    for i in range(data.n_points):
        row = [repr(float(v)) for v in data.points[i]]
        if data.labels is not None:
            row.append(str(int(data.labels[i])))
        writer.writerow(row)
    return buf.getvalue()


def save_csv(path, data: Dataset, label_column: str = DEFAULT_LABEL_COLUMN) -> None:
    """Write a Dataset as CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(to_csv_text(data, label_column))


def fit_normalizer(positive: Dataset) -> Normalizer:
    """Fit per-dimension extrema on the positive sample (needs >= 2 points)."""
    if positive.n_points < 2:
        raise PreconditionError(
            f"fitting a normalizer needs at least 2 points, got {positive.n_points}"
        )
    return Normalizer(
        mins=positive.points.min(axis=0),
        maxs=positive.points.max(axis=0),
        dim_names=positive.dim_names,
    )


def normalize(norm: Normalizer, data: Dataset) -> Dataset:
    """Apply the min-max transform to every point of `data`."""
    return Dataset(norm.transform(data.points), data.dim_names, data.labels)


def denormalize(norm: Normalizer, data: Dataset) -> Dataset:
    """Exact inverse of normalize on non-degenerate dimensions."""
    return Dataset(norm.inverse(data.points), data.dim_names, data.labels)
