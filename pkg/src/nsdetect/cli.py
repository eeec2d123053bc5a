"""Command-line front-end: gen-synth, train, score, interpret, benchmark.

All randomness flows from one --seed per invocation (falling back to the
NS_ANOMALY_SEED environment variable, then 0) and is fanned out
deterministically, so rerunning any command with the same inputs and seed
reproduces its artifacts byte for byte. Every artifact embeds the run
configuration: JSON outputs inline it, CSV outputs get a .meta.json
sidecar. Exit codes: 0 success, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .attribution import interpret, select_baselines
from .dataset import (
    DEFAULT_LABEL_COLUMN,
    Dataset,
    load_csv,
    normalize,
    to_csv_text,
)
from .datagen import SynthConfig, gen_multimodal
from .detector import KIND_NN, KIND_RF, DetectorConfig, fit_detector
from .errors import NsDetectError, PreconditionError, UnsupportedCapabilityError
from .evaluation import kfold_cv
from .forest import RFConfig
from .nn import NNConfig
from .persistence import (
    FORMAT_VERSION,
    atomic_write_text,
    load_baselines,
    load_detector,
    save_baselines,
    save_detector,
    save_json,
)

_SCORE_THRESHOLD = 0.5  # display default for the class column; AUC never uses it


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("NS_ANOMALY_SEED")
    return int(env) if env else 0


def _run_config(args: argparse.Namespace) -> dict:
    cfg = {}
    for key, value in sorted(vars(args).items()):
        if key == "func":
            continue
        cfg[key] = str(value) if isinstance(value, os.PathLike) else value
    return cfg


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _load_dataset(path, label_column: str) -> Dataset:
    """Load a CSV, treating the label column as optional."""
    with open(path, "r", encoding="utf-8") as fh:
        header = [name.strip() for name in fh.readline().rstrip("\r\n").split(",")]
    if label_column in header:
        return load_csv(path, label_column)
    return load_csv(path, None)


def _check_dims(data: Dataset, dim_names: tuple[str, ...], path) -> None:
    if data.dim_names != tuple(dim_names):
        raise PreconditionError(
            f"{path}: columns {list(data.dim_names)} do not match the model's "
            f"dimensions {list(dim_names)}"
        )


def _detector_config(args: argparse.Namespace) -> DetectorConfig:
    nn = NNConfig(
        num_hidden_layers=args.hidden_layers,
        layer_width=args.width,
        dropout_prob=args.dropout,
        batch_size=args.batch_size,
        epochs=args.epochs,
        steps_per_epoch=args.steps_per_epoch,
        learning_rate=args.learning_rate,
        momentum=args.momentum,
    )
    rf = RFConfig(
        num_estimators=args.estimators,
        criterion=args.criterion,
        max_depth=args.max_depth,
        min_samples_split=args.min_samples_split,
        min_samples_leaf=args.min_samples_leaf,
        max_features=args.max_features,
        bootstrap=args.bootstrap,
    )
    return DetectorConfig(
        kind=args.detector, sample_ratio=args.sample_ratio, delta=args.delta, nn=nn, rf=rf
    )


def _add_detector_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--detector", choices=[KIND_NN, KIND_RF], required=True)
    parser.add_argument("--sample-ratio", type=float, default=2.0,
                        help="negatives per positive, r_s (default 2.0)")
    parser.add_argument("--delta", type=float, default=0.05,
                        help="bounding-box expansion in normalized units (default 0.05)")
    group_nn = parser.add_argument_group("ns-nn options")
    group_nn.add_argument("--hidden-layers", type=int, default=2)
    group_nn.add_argument("--width", type=int, default=64)
    group_nn.add_argument("--dropout", type=float, default=0.1)
    group_nn.add_argument("--batch-size", type=int, default=32)
    group_nn.add_argument("--epochs", type=int, default=100)
    group_nn.add_argument("--steps-per-epoch", type=int, default=None)
    group_nn.add_argument("--learning-rate", type=float, default=1e-3)
    group_nn.add_argument("--momentum", type=float, default=0.9)
    group_rf = parser.add_argument_group("ns-rf options")
    group_rf.add_argument("--estimators", type=int, default=100)
    group_rf.add_argument("--criterion", choices=["gini", "entropy"], default="gini")
    group_rf.add_argument("--max-depth", type=int, default=None)
    group_rf.add_argument("--min-samples-split", type=int, default=2)
    group_rf.add_argument("--min-samples-leaf", type=int, default=1)
    group_rf.add_argument("--max-features", type=_max_features, default="sqrt",
                          help="integer or 'sqrt'")
    group_rf.add_argument("--no-bootstrap", dest="bootstrap", action="store_false")


def _max_features(text: str):
    if text == "sqrt":
        return "sqrt"
    return int(text)


def cmd_gen_synth(args: argparse.Namespace) -> int:
    config = SynthConfig(
        dims=args.dims,
        num_modes=args.modes,
        mode_magnitude=args.mode_magnitude,
        sigma=args.sigma,
        n_normal=args.n,
        anomaly_fraction=args.anomaly_frac,
        noise_dim_fraction=args.noise_frac,
        seed=args.seed,
    )
    data = gen_multimodal(config)
    atomic_write_text(args.output, to_csv_text(data, args.label_column))
    save_json(
        str(args.output) + ".meta.json",
        {
            "format_version": FORMAT_VERSION,
            "command": "gen-synth",
            "run_config": _run_config(args),
        },
    )
    print(f"wrote {data.n_points} rows ({int(np.sum(data.labels == 0))} anomalies) "
          f"to {args.output}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    data = _load_dataset(args.data, args.label_column)
    config = _detector_config(args)
    detector = fit_detector(data.without_labels(), config, args.seed)
    run_config = _run_config(args)
    save_detector(args.output, detector, run_config)
    print(f"wrote model to {args.output}")
    if args.detector == KIND_NN:
        baselines_path = args.baselines_out
        if baselines_path is None:
            root, _ = os.path.splitext(str(args.output))
            baselines_path = root + "-baselines.json"
        positive_n = normalize(detector.normalizer, data.without_labels())
        baselines = select_baselines(detector.model, positive_n, args.epsilon)
        save_baselines(baselines_path, baselines, run_config, detector.dim_names)
        print(f"wrote {baselines.n_points} baseline points to {baselines_path}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    detector = load_detector(args.model)
    data = _load_dataset(args.data, args.label_column)
    _check_dims(data, detector.dim_names, args.data)
    scores = detector.score_raw(data.points)
    rows = [
        [str(i), repr(float(s)), str(int(s >= _SCORE_THRESHOLD))]
        for i, s in enumerate(scores)
    ]
    atomic_write_text(args.output, _csv_text(["index", "score", "predicted_class"], rows))
    save_json(
        str(args.output) + ".meta.json",
        {
            "format_version": FORMAT_VERSION,
            "command": "score",
            "run_config": _run_config(args),
        },
    )
    print(f"wrote {len(rows)} scores to {args.output}")
    return 0


def _blame_bars(report: dict, width: int = 40) -> str:
    blames = report["blame"]
    peak = max(abs(v) for v in blames.values()) or 1.0
    lines = [f"score={report['score']:.4f}  "
             f"residual={report['completeness_residual']:.2e}"]
    for name, value in blames.items():
        bar = "#" * max(1, math.ceil(abs(value) / peak * width)) if value else ""
        lines.append(f"  {name:<12} {value:+.4f} {bar}")
    return "\n".join(lines)


def cmd_interpret(args: argparse.Namespace) -> int:
    detector = load_detector(args.model)
    if detector.kind != KIND_NN:
        raise UnsupportedCapabilityError(
            f"model {args.model} is {detector.kind}; interpretation needs the "
            f"differentiable {KIND_NN} detector"
        )
    baselines = load_baselines(args.baselines)
    data = _load_dataset(args.data, args.label_column)
    _check_dims(data, detector.dim_names, args.data)
    if args.indices is None:
        indices = list(range(data.n_points))
    else:
        try:
            indices = [int(tok) for tok in args.indices.split(",") if tok.strip()]
        except ValueError:
            raise PreconditionError(
                f"--indices must be comma-separated integers, got {args.indices!r}"
            ) from None
        bad = [i for i in indices if not 0 <= i < data.n_points]
        if bad:
            raise PreconditionError(
                f"indices {bad} out of range for {data.n_points} rows"
            )
    reports = []
    for i in indices:
        result = interpret(
            detector.model, baselines, data.points[i], args.steps, detector.normalizer
        )
        reports.append({"index": i, **result.to_report_dict()})
    save_json(
        args.output,
        {
            "format_version": FORMAT_VERSION,
            "command": "interpret",
            "run_config": _run_config(args),
            "reports": reports,
        },
    )
    if args.summary:
        for report in reports:
            print(f"point {report['index']}:")
            print(_blame_bars(report))
    print(f"wrote {len(reports)} interpretations to {args.output}")
    return 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    data = load_csv(args.data, args.label_column)
    config = _detector_config(args)
    report = kfold_cv(
        data,
        config,
        folds=args.folds,
        trials=args.trials,
        seed=args.seed,
        dataset_name=os.path.basename(str(args.data)),
    )
    save_json(
        args.output,
        {
            "format_version": FORMAT_VERSION,
            "command": "benchmark",
            "run_config": _run_config(args),
            "report": report.to_json_dict(),
        },
    )
    table = report.format_table()
    print(table)
    if args.table_out:
        atomic_write_text(args.table_out, table + "\n")
    print(f"wrote report to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsdetect",
        description="Negative-sampling anomaly detection with integrated-gradients "
        "interpretation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="generate a labeled synthetic dataset")
    p.add_argument("--dims", type=int, default=16)
    p.add_argument("--modes", type=int, default=2)
    p.add_argument("--mode-magnitude", type=float, default=2.4)
    p.add_argument("--sigma", type=float, default=math.sqrt(0.5))
    p.add_argument("--n", type=int, default=2500, help="number of normal points")
    p.add_argument("--anomaly-frac", type=float, default=0.05)
    p.add_argument("--noise-frac", type=float, default=0.0)
    p.add_argument("--label-column", default=DEFAULT_LABEL_COLUMN)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("train", help="fit a detector and persist it as JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default=DEFAULT_LABEL_COLUMN,
                   help="ground-truth column to drop if present (training is unsupervised)")
    _add_detector_args(p)
    p.add_argument("--epsilon", type=float, default=0.01,
                   help="baseline-set tolerance for ns-nn (default 0.01)")
    p.add_argument("--baselines-out", default=None,
                   help="baseline-set path for ns-nn (default: <output>-baselines.json)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score a CSV with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default=DEFAULT_LABEL_COLUMN)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("interpret", help="attribute anomaly scores to dimensions")
    p.add_argument("--model", required=True)
    p.add_argument("--baselines", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default=DEFAULT_LABEL_COLUMN)
    p.add_argument("--indices", default=None,
                   help="comma-separated row indices (default: all rows)")
    p.add_argument("--steps", type=int, default=2000,
                   help="integration steps k (default 2000)")
    p.add_argument("--summary", action="store_true",
                   help="print a plain-text blame bar chart per point")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_interpret)

    p = sub.add_parser("benchmark", help="repeated stratified k-fold evaluation")
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default=DEFAULT_LABEL_COLUMN)
    _add_detector_args(p)
    p.add_argument("--trials", type=int, default=4)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--table-out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.seed = _resolve_seed(args.seed)
    try:
        return args.func(args)
    except (NsDetectError, OSError, json.JSONDecodeError) as exc:
        print(f"nsdetect {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
