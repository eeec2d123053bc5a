"""ROC-AUC scoring, stratified cross-validation, and significance testing.

AUC follows the rank-based Mann-Whitney formulation with ties counted as
one half: label 1 (normal) is the positive class and the detector score is
P(normal). Cross-validation trains the negative-sampling detector on each
training slice with ground-truth labels discarded (the entire positive
sample is treated as normal) and scores the held-out slice against its
true labels.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .dataset import Dataset
from .detector import DetectorConfig, fit_detector
from .errors import PreconditionError


def roc_auc(scores, labels) -> float:
    """Probability a random normal point outranks a random anomaly (ties = 1/2)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise PreconditionError("scores and labels must be equal-length vectors")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise PreconditionError("AUC is undefined with a single class")
    ranks = rankdata(scores)  # average ranks on ties
    rank_sum_pos = float(ranks[labels == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def rank_sum_test(auc_a, auc_b) -> float:
    """Two-sided Wilcoxon rank-sum p-value, normal approximation with tie
    correction. Returns 1.0 when the statistic has zero variance."""
    a = np.asarray(auc_a, dtype=np.float64)
    b = np.asarray(auc_b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise PreconditionError("both samples must be non-empty")
    n1, n2 = a.size, b.size
    n = n1 + n2
    combined = np.concatenate([a, b])
    ranks = rankdata(combined)
    u1 = float(ranks[:n1].sum()) - n1 * (n1 + 1) / 2.0
    mean_u = n1 * n2 / 2.0
    _, tie_counts = np.unique(combined, return_counts=True)
    tie_term = float(np.sum(tie_counts**3 - tie_counts))
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        return 1.0
    z = (u1 - mean_u) / math.sqrt(variance)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def stratified_fold_indices(
    labels: np.ndarray, folds: int, rng: np.random.Generator
) -> list[np.ndarray]:
    """Shuffled, class-stratified partition of row indices into `folds` parts."""
    if folds < 2:
        raise PreconditionError("folds must be >= 2")
    fold_members: list[list[np.ndarray]] = [[] for _ in range(folds)]
    for cls in np.unique(labels):
        cls_idx = np.nonzero(labels == cls)[0]
        if cls_idx.size < folds:
            raise PreconditionError(
                f"class {cls} has {cls_idx.size} points, fewer than {folds} folds"
            )
        cls_idx = rng.permutation(cls_idx)
        for f, chunk in enumerate(np.array_split(cls_idx, folds)):
            fold_members[f].append(chunk)
    return [np.sort(np.concatenate(chunks)) for chunks in fold_members]


@dataclass
class EvalReport:
    """Per-trial-per-fold AUC values with their mean/std as percentages."""

    detector: str
    dataset: str
    aucs: np.ndarray  # shape (trials, folds)
    wall_seconds: float
    config: dict = field(default_factory=dict)

    @property
    def mean_auc(self) -> float:
        return float(np.mean(self.aucs))

    @property
    def std_auc(self) -> float:
        return float(np.std(self.aucs, ddof=1)) if self.aucs.size > 1 else 0.0

    @property
    def mean_pct(self) -> float:
        return 100.0 * self.mean_auc

    @property
    def std_pct(self) -> float:
        return 100.0 * self.std_auc

    def to_json_dict(self) -> dict:
        return {
            "detector": self.detector,
            "dataset": self.dataset,
            "aucs": self.aucs.tolist(),
            "mean_auc": self.mean_auc,
            "std_auc": self.std_auc,
            "mean_pct": self.mean_pct,
            "std_pct": self.std_pct,
            "wall_seconds": self.wall_seconds,
            "config": self.config,
        }

    def format_table(self) -> str:
        """Aligned plain-text table, mean +/- std as percentages."""
        header = f"{'dataset':<20} {'detector':<10} {'auc %':>14} {'runs':>6}"
        value = f"{self.mean_pct:.1f} ± {self.std_pct:.1f}"
        row = f"{self.dataset:<20} {self.detector:<10} {value:>14} {self.aucs.size:>6}"
        return "\n".join([header, "-" * len(header), row])


def kfold_cv(
    data: Dataset,
    detector_config: DetectorConfig,
    folds: int,
    trials: int,
    seed: int,
    dataset_name: str = "dataset",
) -> EvalReport:
    """Repeated stratified k-fold evaluation of a negative-sampling detector.

    Per trial: seeded shuffle and stratified split; per fold: fit the
    detector on the training slice (labels discarded), score the held-out
    slice, and compute AUC against its ground-truth labels.
    """
    if data.labels is None:
        raise PreconditionError("cross-validation needs ground-truth labels")
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    started = time.perf_counter()
    trial_seqs = np.random.SeedSequence(seed).spawn(trials)
    aucs = np.zeros((trials, folds))
    for t, trial_seq in enumerate(trial_seqs):
        shuffle_seq, fit_seq = trial_seq.spawn(2)
        rng = np.random.default_rng(shuffle_seq)
        fold_idx = stratified_fold_indices(data.labels, folds, rng)
        fit_seeds = fit_seq.generate_state(folds)
        for f in range(folds):
            test_idx = fold_idx[f]
            train_idx = np.sort(
                np.concatenate([fold_idx[g] for g in range(folds) if g != f])
            )
            train = data.select(train_idx).without_labels()
            test = data.select(test_idx)
            detector = fit_detector(train, detector_config, int(fit_seeds[f]))
            scores = detector.score_raw(test.points)
            aucs[t, f] = roc_auc(scores, test.labels)
    return EvalReport(
        detector=detector_config.kind,
        dataset=dataset_name,
        aucs=aucs,
        wall_seconds=time.perf_counter() - started,
        config=detector_config.to_json_dict(),
    )
