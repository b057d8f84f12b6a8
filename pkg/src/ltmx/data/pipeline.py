"""Dataset construction: pairing, long-tailed subsampling, priors, splits."""

from __future__ import annotations

import math

import numpy as np

from ltmx.data.types import (
    BACKWARD,
    FORWARD,
    UNIFORM,
    ClassDistribution,
    DistributionSpec,
    LabeledSource,
    PairedDataset,
)
from ltmx.errors import ConfigurationError, DataError
from ltmx.seeding import rng_for


def pair_modalities(source_a: LabeledSource, source_b: LabeledSource, seed: int) -> PairedDataset:
    """Join two labeled pools into aligned pairs, one item from each per sample.

    Within every class the pairing is a seed-deterministic random bijection
    over the first min(count_a, count_b) items of each shuffled pool; the
    leftovers of the larger pool are discarded. Output is sorted by class,
    then by the order the pairs were drawn.
    """
    labels_a, labels_b = source_a.label_set(), source_b.label_set()
    if labels_a != labels_b:
        raise ConfigurationError(
            f"label sets differ: {source_a.name} has {sorted(labels_a)}, {source_b.name} has {sorted(labels_b)}"
        )
    num_classes = len(labels_a)
    if labels_a != set(range(num_classes)):
        raise ConfigurationError(f"labels must be contiguous 0..K-1, got {sorted(labels_a)}")

    rng = rng_for(seed, f"pair:{source_a.name}+{source_b.name}")
    idx_a_parts, idx_b_parts, label_parts = [], [], []
    for k in range(num_classes):
        pool_a = np.flatnonzero(source_a.labels == k)
        pool_b = np.flatnonzero(source_b.labels == k)
        if len(pool_a) == 0 or len(pool_b) == 0:
            empty = source_a.name if len(pool_a) == 0 else source_b.name
            raise ConfigurationError(f"class {k} is empty in source {empty}")
        n = min(len(pool_a), len(pool_b))
        idx_a_parts.append(rng.permutation(pool_a)[:n])
        idx_b_parts.append(rng.permutation(pool_b)[:n])
        label_parts.append(np.full(n, k, dtype=np.int64))

    idx_a = np.concatenate(idx_a_parts)
    idx_b = np.concatenate(idx_b_parts)
    return PairedDataset(
        modalities=[source_a.data[idx_a], source_b.data[idx_b]],
        labels=np.concatenate(label_parts),
        num_classes=num_classes,
        kinds=(source_a.kind, source_b.kind),
        source_names=(source_a.name, source_b.name),
        refs=[idx_a.astype(np.int64), idx_b.astype(np.int64)],
    )


def longtail_counts(num_classes: int, spec: DistributionSpec, head_count: int) -> np.ndarray:
    """Per-class target counts for an exponential-decay long tail.

    Forward: N_k = round_half_up(head * r^(-k/(K-1))) for k = 0..K-1, floored
    at 1 so the tail class stays nonempty. Backward reverses the assignment;
    uniform assigns head_count everywhere.
    """
    if head_count < 1:
        raise ConfigurationError("head count must be >= 1")
    if spec.kind == UNIFORM:
        return np.full(num_classes, head_count, dtype=np.int64)
    if num_classes < 2:
        raise ConfigurationError("an imbalanced spec needs at least 2 classes")
    exponents = -np.arange(num_classes, dtype=np.float64) / (num_classes - 1)
    counts = np.floor(head_count * spec.ratio**exponents + 0.5).astype(np.int64)
    counts = np.maximum(counts, 1)
    if spec.kind == BACKWARD:
        counts = counts[::-1].copy()
    return counts


def subsample_longtailed(
    dataset: PairedDataset,
    spec: DistributionSpec,
    seed: int,
    head_count: int | None = None,
) -> PairedDataset:
    """Subsample without replacement to the spec's per-class target counts.

    `head_count` sets the largest class size; by default the smallest current
    class count is used so every target is feasible.
    """
    counts_now = dataset.class_counts()
    if head_count is None:
        head_count = int(counts_now.min())
    targets = longtail_counts(dataset.num_classes, spec, head_count)
    shortfalls = [
        (k, int(targets[k] - counts_now[k]))
        for k in range(dataset.num_classes)
        if counts_now[k] < targets[k]
    ]
    if shortfalls:
        detail = ", ".join(f"class {k} short by {s}" for k, s in shortfalls)
        raise DataError(f"insufficient source samples: {detail}")

    rng = rng_for(seed, f"subsample:{spec.split_id}")
    keep = []
    for k in range(dataset.num_classes):
        pool = np.flatnonzero(dataset.labels == k)
        chosen = rng.permutation(pool)[: targets[k]]
        keep.append(np.sort(chosen))
    return dataset.subset(np.concatenate(keep))


def class_priors(dataset: PairedDataset) -> ClassDistribution:
    """Empirical label frequencies of a dataset, with the reversed vector."""
    if len(dataset) == 0:
        raise DataError("cannot compute priors of an empty dataset")
    return ClassDistribution.from_counts(dataset.class_counts())


def stratified_split(dataset: PairedDataset, train_frac: float, seed: int) -> tuple[PairedDataset, PairedDataset]:
    """Per-class random split keeping ~train_frac of each class in the first part.

    Both parts keep at least one sample of every class, preserving the
    imbalance ratio of the whole to within rounding.
    """
    if not 0.0 < train_frac < 1.0:
        raise ConfigurationError("train fraction must be in (0, 1)")
    rng = rng_for(seed, "stratified-split")
    train_idx, test_idx = [], []
    for k in range(dataset.num_classes):
        pool = rng.permutation(np.flatnonzero(dataset.labels == k))
        if len(pool) < 2:
            raise DataError(f"class {k} has {len(pool)} sample(s); need >= 2 to split")
        n_train = int(math.floor(len(pool) * train_frac + 0.5))
        n_train = min(max(n_train, 1), len(pool) - 1)
        train_idx.append(np.sort(pool[:n_train]))
        test_idx.append(np.sort(pool[n_train:]))
    return dataset.subset(np.concatenate(train_idx)), dataset.subset(np.concatenate(test_idx))
