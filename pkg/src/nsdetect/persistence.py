"""Versioned JSON artifacts and atomic file writes.

Every artifact embeds the run configuration that produced it, so any
output can be reproduced from its own metadata. Files are written to a
temp path in the destination directory and renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile

from .attribution import BaselineSet
from .dataset import Normalizer
from .detector import Detector, DetectorConfig, KIND_NN
from .errors import DataFormatError
from .forest import RFModel
from .nn import NNModel

FORMAT_VERSION = 1


def atomic_write_text(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def save_json(path, obj: dict) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2) + "\n")


def load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _check_version(obj: dict, path) -> None:
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise DataFormatError(
            f"{path}: unsupported format_version {version!r}, expected {FORMAT_VERSION}"
        )


def save_detector(path, detector: Detector, run_config: dict) -> None:
    save_json(
        path,
        {
            "format_version": FORMAT_VERSION,
            "kind": detector.kind,
            "run_config": run_config,
            "dim_names": list(detector.dim_names),
            "normalizer": detector.normalizer.to_json_dict(),
            "detector_config": detector.config.to_json_dict(),
            "model": detector.model.to_json_dict(),
        },
    )


def load_detector(path) -> Detector:
    obj = load_json(path)
    _check_version(obj, path)
    kind = obj["kind"]
    if kind == KIND_NN:
        model = NNModel.from_json_dict(obj["model"])
    else:
        model = RFModel.from_json_dict(obj["model"])
    return Detector(
        kind=kind,
        model=model,
        normalizer=Normalizer.from_json_dict(obj["normalizer"]),
        dim_names=tuple(obj["dim_names"]),
        config=DetectorConfig.from_json_dict(obj["detector_config"]),
    )


def save_baselines(path, baselines: BaselineSet, run_config: dict, dim_names) -> None:
    save_json(
        path,
        {
            "format_version": FORMAT_VERSION,
            "run_config": run_config,
            "dim_names": list(dim_names),
            "baselines": baselines.to_json_dict(),
        },
    )


def load_baselines(path) -> BaselineSet:
    obj = load_json(path)
    _check_version(obj, path)
    return BaselineSet.from_json_dict(obj["baselines"])
