"""Evaluation metrics and multi-run summaries.

Accuracy is a percentage; F1 is macro-averaged over classes, where a class
with no predictions and no true samples is skipped and any other
zero-denominator case contributes 0. Repeated-run summaries report the mean
and the standard error (sample std / sqrt(n)).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ltmx.errors import DataError

RESULT_COLUMNS = ("model_variant", "train_ir", "test_spec", "seed", "accuracy", "macro_f1", "w1", "w2", "w3")
SUMMARY_COLUMNS = (
    "model_variant",
    "train_ir",
    "test_spec",
    "n_runs",
    "accuracy_mean",
    "accuracy_se",
    "macro_f1_mean",
    "macro_f1_se",
    "w1_mean",
    "w2_mean",
    "w3_mean",
)


def _validated(preds, labels) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(preds, dtype=np.int64)
    y = np.asarray(labels, dtype=np.int64)
    if p.size == 0 or y.size == 0:
        raise DataError("cannot score an empty prediction set")
    if p.shape != y.shape:
        raise DataError(f"{p.shape[0]} predictions vs {y.shape[0]} labels")
    return p, y


def accuracy(preds, labels) -> float:
    """Percentage of exact matches."""
    p, y = _validated(preds, labels)
    return 100.0 * float((p == y).mean())


def confusion_matrix(preds, labels, num_classes: int) -> np.ndarray:
    p, y = _validated(preds, labels)
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (y, p), 1)
    return cm


def macro_f1(preds, labels, num_classes: int) -> float:
    """Unweighted mean of per-class F1 = 2PR/(P+R)."""
    cm = confusion_matrix(preds, labels, num_classes)
    tp = np.diag(cm).astype(np.float64)
    support = cm.sum(axis=1).astype(np.float64)     # true samples per class
    predicted = cm.sum(axis=0).astype(np.float64)   # predictions per class
    scores = []
    for k in range(num_classes):
        if support[k] == 0 and predicted[k] == 0:
            continue
        precision = tp[k] / predicted[k] if predicted[k] > 0 else 0.0
        recall = tp[k] / support[k] if support[k] > 0 else 0.0
        scores.append(2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0)
    if not scores:
        raise DataError("no class present in either predictions or labels")
    return float(np.mean(scores))


def binary_f1(preds, labels, positive: int = 1) -> float:
    """F1 of the positive class alone (reported for two-class tasks)."""
    p, y = _validated(preds, labels)
    tp = float(((p == positive) & (y == positive)).sum())
    fp = float(((p == positive) & (y != positive)).sum())
    fn = float(((p != positive) & (y == positive)).sum())
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom > 0 else 0.0


def mean_and_stderr(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size < 2:
        raise DataError("standard error needs at least 2 repetitions")
    return float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size))


@dataclass(frozen=True)
class EvalRow:
    """One (variant, training imbalance, test split, seed) evaluation record."""

    model_variant: str
    train_ir: float
    test_spec: str
    seed: int
    accuracy: float
    macro_f1: float
    w1: float
    w2: float
    w3: float
    positive_f1: float | None = None
    per_class_f1: tuple[float, ...] = ()

    def as_csv(self) -> list[str]:
        return [
            self.model_variant,
            f"{self.train_ir:g}",
            self.test_spec,
            str(self.seed),
            repr(self.accuracy),
            repr(self.macro_f1),
            repr(self.w1),
            repr(self.w2),
            repr(self.w3),
        ]


@dataclass
class EvalReport:
    """Mean/standard-error summary over repeated runs of one grid cell."""

    model_variant: str
    train_ir: float
    test_spec: str
    seeds: tuple[int, ...]
    accuracy_mean: float
    accuracy_se: float
    macro_f1_mean: float
    macro_f1_se: float
    weights_mean: tuple[float, float, float]
    per_class_f1_mean: tuple[float, ...] = ()
    partial: bool = False
    failed_seeds: tuple[int, ...] = ()

    def as_csv(self) -> list[str]:
        return [
            self.model_variant,
            f"{self.train_ir:g}",
            self.test_spec,
            str(len(self.seeds)),
            repr(self.accuracy_mean),
            repr(self.accuracy_se),
            repr(self.macro_f1_mean),
            repr(self.macro_f1_se),
            repr(self.weights_mean[0]),
            repr(self.weights_mean[1]),
            repr(self.weights_mean[2]),
        ]


def summarize_rows(rows: Sequence[EvalRow], failed_seeds: Sequence[int] = ()) -> list[EvalReport]:
    """Group per-seed rows by grid cell and attach mean/standard-error stats."""
    cells: dict[tuple[str, float, str], list[EvalRow]] = {}
    for row in rows:
        cells.setdefault((row.model_variant, row.train_ir, row.test_spec), []).append(row)
    reports = []
    for (variant, ir, split), members in sorted(cells.items()):
        members = sorted(members, key=lambda r: r.seed)
        acc_mean, acc_se = mean_and_stderr([m.accuracy for m in members])
        f1_mean, f1_se = mean_and_stderr([m.macro_f1 for m in members])
        per_class = ()
        if members[0].per_class_f1:
            per_class = tuple(np.mean([m.per_class_f1 for m in members], axis=0).tolist())
        reports.append(
            EvalReport(
                model_variant=variant,
                train_ir=ir,
                test_spec=split,
                seeds=tuple(m.seed for m in members),
                accuracy_mean=acc_mean,
                accuracy_se=acc_se,
                macro_f1_mean=f1_mean,
                macro_f1_se=f1_se,
                weights_mean=(
                    float(np.mean([m.w1 for m in members])),
                    float(np.mean([m.w2 for m in members])),
                    float(np.mean([m.w3 for m in members])),
                ),
                per_class_f1_mean=per_class,
                partial=bool(failed_seeds),
                failed_seeds=tuple(failed_seeds),
            )
        )
    return reports


def repeat_and_summarize(
    config,
    n_reps: int,
    runner: Callable[[object, int], list[EvalRow]],
) -> tuple[list[EvalReport], list[EvalRow], list[int]]:
    """Run `runner(config, seed)` over the first n_reps seeds and summarize.

    A rep that raises is recorded as failed and excluded; the reports are
    then flagged partial. Returns (reports, raw rows, failed seeds).
    """
    if n_reps < 2:
        raise DataError("standard errors need n_reps >= 2")
    seeds = list(config.seeds[:n_reps]) if len(config.seeds) >= n_reps else list(config.seeds)
    if len(seeds) < n_reps:
        raise DataError(f"config provides {len(seeds)} seeds; {n_reps} requested")
    rows: list[EvalRow] = []
    failed: list[int] = []
    for seed in seeds:
        try:
            rows.extend(runner(config, seed))
        except Exception:
            failed.append(seed)
    if not rows:
        raise DataError("every repetition failed")
    return summarize_rows(rows, failed), rows, failed


def write_results_csv(path: str | Path, rows: Sequence[EvalRow]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow(row.as_csv())


def read_results_csv(path: str | Path) -> list[EvalRow]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                EvalRow(
                    model_variant=rec["model_variant"],
                    train_ir=float(rec["train_ir"]),
                    test_spec=rec["test_spec"],
                    seed=int(rec["seed"]),
                    accuracy=float(rec["accuracy"]),
                    macro_f1=float(rec["macro_f1"]),
                    w1=float(rec["w1"]),
                    w2=float(rec["w2"]),
                    w3=float(rec["w3"]),
                )
            )
    return rows


def write_summary_csv(path: str | Path, reports: Sequence[EvalReport]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for report in reports:
            writer.writerow(report.as_csv())


def write_binary_f1_csv(path: str | Path, rows: Sequence[EvalRow]) -> None:
    """Positive-class F1 side table, emitted for two-class tasks only."""
    rows = [r for r in rows if r.positive_f1 is not None]
    if not rows:
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("model_variant", "train_ir", "test_spec", "seed", "positive_f1"))
        for row in rows:
            writer.writerow(
                [row.model_variant, f"{row.train_ir:g}", row.test_spec, str(row.seed), repr(row.positive_f1)]
            )
