"""Core data containers: sources, paired datasets, class distributions, split specs.

Class labels are 0-based throughout: class 0 is the head class of a forward
long-tail and class K-1 its tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ltmx.errors import ConfigurationError, DataError

IMAGE = "image"
TABULAR = "tabular"


@dataclass(frozen=True)
class LabeledSource:
    """One single-modality labeled pool (e.g. a digit image collection)."""

    name: str
    data: np.ndarray          # [n, ...] float32; images HxWxC in [0,1], tabular flat vectors
    labels: np.ndarray        # [n] int64
    kind: str = IMAGE

    def __post_init__(self):
        if len(self.data) != len(self.labels):
            raise DataError(f"source {self.name}: {len(self.data)} items vs {len(self.labels)} labels")
        if self.kind not in (IMAGE, TABULAR):
            raise ConfigurationError(f"source {self.name}: unknown modality kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.labels)

    def label_set(self) -> set[int]:
        return set(np.unique(self.labels).tolist())


@dataclass(frozen=True)
class PairedSample:
    """One multi-modal instance: M aligned modality inputs plus a label."""

    modalities: tuple[np.ndarray, ...]
    label: int

    def __post_init__(self):
        if len(self.modalities) < 1:
            raise DataError("a paired sample needs at least one modality")


@dataclass
class PairedDataset:
    """Aligned multi-modal dataset: modality m is `modalities[m][i]` for sample i."""

    modalities: list[np.ndarray]            # each [n, ...]
    labels: np.ndarray                      # [n] int64, values in 0..num_classes-1
    num_classes: int
    kinds: tuple[str, ...]
    source_names: tuple[str, ...] | None = None
    refs: list[np.ndarray] | None = field(default=None)  # per modality: index into its source

    def __post_init__(self):
        n = len(self.labels)
        for arr in self.modalities:
            if len(arr) != n:
                raise DataError(f"modality array length {len(arr)} != {n} labels")
        if len(self.kinds) != len(self.modalities):
            raise DataError("one kind per modality required")
        if n and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise DataError("labels outside 0..K-1")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def num_modalities(self) -> int:
        return len(self.modalities)

    def sample(self, i: int) -> PairedSample:
        return PairedSample(tuple(m[i] for m in self.modalities), int(self.labels[i]))

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes).astype(np.int64)

    def subset(self, indices: np.ndarray) -> "PairedDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return PairedDataset(
            modalities=[m[idx] for m in self.modalities],
            labels=self.labels[idx],
            num_classes=self.num_classes,
            kinds=self.kinds,
            source_names=self.source_names,
            refs=None if self.refs is None else [r[idx] for r in self.refs],
        )

    def drop_to_first_modality(self) -> "PairedDataset":
        """Single-modality view used by the one-modality ablation."""
        return PairedDataset(
            modalities=[self.modalities[0]],
            labels=self.labels,
            num_classes=self.num_classes,
            kinds=(self.kinds[0],),
            source_names=None if self.source_names is None else (self.source_names[0],),
            refs=None if self.refs is None else [self.refs[0]],
        )

    def all_image(self) -> bool:
        return all(k == IMAGE for k in self.kinds)


@dataclass(frozen=True)
class ClassDistribution:
    """Per-class counts with the derived prior vector and its reversal."""

    counts: np.ndarray          # [K] int64
    priors: np.ndarray          # [K] float64, sums to 1
    reversed_priors: np.ndarray

    @classmethod
    def from_counts(cls, counts: Sequence[int] | np.ndarray) -> "ClassDistribution":
        c = np.asarray(counts, dtype=np.int64)
        if c.ndim != 1 or len(c) == 0:
            raise DataError("counts must be a nonempty vector")
        if (c < 0).any():
            raise DataError("counts must be nonnegative")
        total = int(c.sum())
        if total == 0:
            raise DataError("empty dataset: all class counts are zero")
        pi = c.astype(np.float64) / total
        return cls(counts=c, priors=pi, reversed_priors=pi[::-1].copy())

    def __post_init__(self):
        for name, p in (("priors", self.priors), ("reversed_priors", self.reversed_priors)):
            if abs(float(p.sum()) - 1.0) > 1e-9:
                raise DataError(f"{name} do not sum to 1")

    @property
    def num_classes(self) -> int:
        return len(self.counts)

    def smoothed(self, floor: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
        """Priors and reversed priors floored at `floor` and renormalized."""
        p = np.maximum(self.priors, floor)
        p = p / p.sum()
        return p, p[::-1].copy()


FORWARD = "forward"
UNIFORM = "uniform"
BACKWARD = "backward"
_KINDS = (FORWARD, UNIFORM, BACKWARD)


@dataclass(frozen=True)
class DistributionSpec:
    """Target class-size shape: forward/backward exponential decay at ratio r, or uniform."""

    kind: str
    ratio: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigurationError(f"unknown distribution kind {self.kind!r}")
        if self.ratio < 1.0:
            raise ConfigurationError("imbalance ratio must be >= 1")
        if self.kind == UNIFORM and self.ratio != 1.0:
            raise ConfigurationError("uniform spec requires ratio 1")
        if self.kind != UNIFORM and self.ratio == 1.0:
            raise ConfigurationError("ratio 1 is only valid for the uniform kind")

    @property
    def split_id(self) -> str:
        if self.kind == UNIFORM:
            return UNIFORM
        return f"{self.kind}_{self.ratio:g}".replace(".", "p")

    @classmethod
    def parse(cls, token: str) -> "DistributionSpec":
        """Parse 'forward:50', 'backward:10', or 'uniform'."""
        token = token.strip()
        if ":" in token:
            kind, _, ratio = token.partition(":")
            try:
                return cls(kind.strip(), float(ratio))
            except ValueError as exc:
                raise ConfigurationError(f"bad distribution spec {token!r}: {exc}") from None
        if token == UNIFORM:
            return cls(UNIFORM, 1.0)
        raise ConfigurationError(f"bad distribution spec {token!r}; expected kind:ratio or 'uniform'")

    def format(self) -> str:
        return UNIFORM if self.kind == UNIFORM else f"{self.kind}:{self.ratio:g}"
