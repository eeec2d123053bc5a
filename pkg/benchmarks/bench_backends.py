#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times random-forest training and batch prediction on a synthetic
negative-sampling workload under both backends and verifies they produce
identical scores. Run from the repo root:

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --n 4000 --trees 60
"""

import argparse
import time

import numpy as np

from nsdetect import (
    DetectorConfig,
    RFConfig,
    SynthConfig,
    fit_detector,
    gen_multimodal,
    predict_rf_batch,
    use_backend,
)


def time_backend(backend, data, config, seed, queries):
    with use_backend(backend):
        started = time.perf_counter()
        detector = fit_detector(data, config, seed)
        train_s = time.perf_counter() - started

        started = time.perf_counter()
        scores = predict_rf_batch(detector.model, queries)
        predict_s = time.perf_counter() - started
    return train_s, predict_s, scores


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2500, help="normal points")
    parser.add_argument("--dims", type=int, default=16)
    parser.add_argument("--trees", type=int, default=40)
    parser.add_argument("--max-depth", type=int, default=50)
    parser.add_argument("--queries", type=int, default=20000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    data = gen_multimodal(SynthConfig(dims=args.dims, n_normal=args.n,
                                      seed=args.seed)).without_labels()
    config = DetectorConfig(
        kind="ns-rf",
        rf=RFConfig(num_estimators=args.trees, max_depth=args.max_depth),
    )
    rng = np.random.default_rng(args.seed + 1)
    queries = rng.uniform(0, 1, (args.queries, args.dims))
    queries = queries * (data.points.max(0) - data.points.min(0)) + data.points.min(0)

    # Warm-up: trigger (or load) numba compilation outside the timed region.
    warm = gen_multimodal(SynthConfig(dims=4, n_normal=60, seed=1)).without_labels()
    with use_backend("numba"):
        d = fit_detector(warm, DetectorConfig(kind="ns-rf",
                                              rf=RFConfig(num_estimators=2)), 0)
        predict_rf_batch(d.model, warm.points)

    print(f"workload: {args.n} positives x {args.dims} dims, ratio 2.0 "
          f"-> {3 * args.n} training rows; {args.trees} trees, "
          f"depth {args.max_depth}; {args.queries} query points")
    results = {}
    for backend in ("numpy", "numba"):
        train_s, predict_s, scores = time_backend(backend, data, config,
                                                  args.seed, queries)
        results[backend] = (train_s, predict_s, scores)
        print(f"  {backend:>6}: train {train_s:8.2f}s   predict {predict_s:7.3f}s")

    np_scores = results["numpy"][2]
    nb_scores = results["numba"][2]
    identical = np.array_equal(np_scores, nb_scores)
    print(f"scores identical across backends: {identical}")
    print(f"speedup (numba vs numpy): train "
          f"{results['numpy'][0] / results['numba'][0]:.1f}x, predict "
          f"{results['numpy'][1] / results['numba'][1]:.1f}x")
    return 0 if identical else 1


if __name__ == "__main__":
    raise SystemExit(main())
