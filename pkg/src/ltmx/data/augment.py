"""Stochastic image augmentation: padded random crop, optional flip, photometric jitter.

Horizontal flips are off by default because they change digit semantics;
lesion-style configs turn them on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ltmx.data.types import PairedDataset, PairedSample
from ltmx.errors import UnsupportedModalityError


@dataclass(frozen=True)
class AugmentConfig:
    crop_pad: int = 3
    flip_prob: float = 0.0
    brightness: float = 0.2
    contrast: float = 0.2


IDENTITY = AugmentConfig(crop_pad=0, flip_prob=0.0, brightness=0.0, contrast=0.0)


def augment_image(image: np.ndarray, config: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """One augmented view of an HxWxC image with values in [0, 1]."""
    out = image
    if config.crop_pad > 0:
        p = config.crop_pad
        padded = np.pad(out, ((p, p), (p, p), (0, 0)), mode="edge")
        dy, dx = rng.integers(0, 2 * p + 1, size=2)
        out = padded[dy : dy + image.shape[0], dx : dx + image.shape[1]]
    if config.flip_prob > 0 and rng.random() < config.flip_prob:
        out = out[:, ::-1]
    out = out.astype(np.float32, copy=True)
    if config.brightness > 0:
        out += rng.uniform(-config.brightness, config.brightness)
    if config.contrast > 0:
        gamma = rng.uniform(-config.contrast, config.contrast)
        mean = out.mean()
        out = (out - mean) * (1.0 + gamma) + mean
    return np.clip(out, 0.0, 1.0)


def stochastic_augment(
    sample: PairedSample, config: AugmentConfig, rng: np.random.Generator
) -> tuple[PairedSample, PairedSample]:
    """Two independently augmented views of an all-image sample; the input is untouched."""
    for m, arr in enumerate(sample.modalities):
        if arr.ndim != 3:
            raise UnsupportedModalityError(
                f"modality {m} is not an image; test-time augmentation only supports "
                "image modalities — use the supervised phase-2 weight fitting instead"
            )
    views = tuple(
        PairedSample(tuple(augment_image(arr, config, rng) for arr in sample.modalities), sample.label)
        for _ in range(2)
    )
    return views[0], views[1]


def augment_dataset_views(
    dataset: PairedDataset, config: AugmentConfig, rng: np.random.Generator
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Two augmented copies of every sample, stacked per modality."""
    if not dataset.all_image():
        raise UnsupportedModalityError(
            "dataset contains non-image modalities; test-time augmentation is unavailable — "
            "use the supervised phase-2 weight fitting instead"
        )
    view_a = [np.empty_like(arr) for arr in dataset.modalities]
    view_b = [np.empty_like(arr) for arr in dataset.modalities]
    for i in range(len(dataset)):
        a, b = stochastic_augment(dataset.sample(i), config, rng)
        for m in range(dataset.num_modalities):
            view_a[m][i] = a.modalities[m]
            view_b[m][i] = b.modalities[m]
    return view_a, view_b
