"""Self-contained synthetic datasets for offline, desk-scale experiments.

Two families:

* a paired digit benchmark — one grayscale 28x28 style and one color 32x32
  style with background clutter and optional per-sample corruption, so the
  two modalities carry genuinely different per-sample informativeness;
* a skin-lesion stand-in — blob images whose border irregularity and color
  variegation depend on the class, plus a 3-field clinical metadata modality
  (gender, anatomic site, age) with class-conditional distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ltmx.data.tabular import CategoricalField, NumericField, TabularSchema, encode_records
from ltmx.data.types import IMAGE, TABULAR, LabeledSource
from ltmx.seeding import rng_for

_GLYPHS = {
    0: ("01110", "10001", "10011", "10101", "11001", "10001", "01110"),
    1: ("00100", "01100", "00100", "00100", "00100", "00100", "01110"),
    2: ("01110", "10001", "00001", "00010", "00100", "01000", "11111"),
    3: ("11111", "00010", "00100", "00010", "00001", "10001", "01110"),
    4: ("00010", "00110", "01010", "10010", "11111", "00010", "00010"),
    5: ("11111", "10000", "11110", "00001", "00001", "10001", "01110"),
    6: ("00110", "01000", "10000", "11110", "10001", "10001", "01110"),
    7: ("11111", "00001", "00010", "00100", "01000", "01000", "01000"),
    8: ("01110", "10001", "10001", "01110", "10001", "10001", "01110"),
    9: ("01110", "10001", "10001", "01111", "00001", "00010", "01100"),
}


def _glyph_mask(digit: int) -> np.ndarray:
    rows = _GLYPHS[digit]
    return np.array([[c == "1" for c in row] for row in rows], dtype=np.float32)


def _dilate(mask: np.ndarray) -> np.ndarray:
    out = mask.copy()
    for axis, shift in ((0, 1), (0, -1), (1, 1), (1, -1)):
        rolled = np.roll(mask, shift, axis=axis)
        if shift > 0:
            rolled[tuple(slice(0, 1) if a == axis else slice(None) for a in range(2))] = 0
        else:
            rolled[tuple(slice(-1, None) if a == axis else slice(None) for a in range(2))] = 0
        out = np.maximum(out, rolled)
    return out


def _place_digit(digit: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Digit mask on a size x size canvas with random zoom, thickness, position."""
    glyph = _glyph_mask(digit)
    if rng.random() < 0.5:
        glyph = _dilate(glyph)
    zoom = int(rng.integers(2, 4)) if size <= 28 else int(rng.integers(2, 5))
    mask = np.kron(glyph, np.ones((zoom, zoom), dtype=np.float32))
    h, w = mask.shape
    if h > size or w > size:
        mask = mask[:size, :size]
        h, w = mask.shape
    canvas = np.zeros((size, size), dtype=np.float32)
    dy = int(rng.integers(0, size - h + 1))
    dx = int(rng.integers(0, size - w + 1))
    canvas[dy : dy + h, dx : dx + w] = mask
    return canvas


@dataclass(frozen=True)
class DigitStyleConfig:
    """One synthetic digit source: size/channels plus nuisance parameters."""

    image_size: int = 28
    channels: int = 1
    per_class: int = 600
    noise: float = 0.15
    clutter: bool = False          # distractor digit fragments at the sides
    corrupt_prob: float = 0.0      # chance a sample is pure noise (uninformative)


def _render_gray(digit: int, cfg: DigitStyleConfig, rng: np.random.Generator) -> np.ndarray:
    mask = _place_digit(digit, cfg.image_size, rng)
    img = mask * rng.uniform(0.65, 1.0)
    img += rng.normal(0.0, cfg.noise, size=img.shape).astype(np.float32)
    return np.clip(img, 0.0, 1.0)[..., None].astype(np.float32)


def _render_color(digit: int, cfg: DigitStyleConfig, rng: np.random.Generator) -> np.ndarray:
    size = cfg.image_size
    fg = rng.uniform(0.55, 1.0, size=3).astype(np.float32)
    bg = rng.uniform(0.0, 0.45, size=3).astype(np.float32)
    mask = _place_digit(digit, size, rng)
    if cfg.clutter:
        for side in (-1, 1):
            frag = _place_digit(int(rng.integers(0, 10)), size, rng)
            frag = np.roll(frag, side * int(rng.integers(size // 2, size)), axis=1)
            mask = np.maximum(mask, 0.45 * frag)
    img = bg[None, None, :] + mask[..., None] * (fg - bg)[None, None, :]
    img += rng.normal(0.0, cfg.noise, size=img.shape).astype(np.float32)
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def make_digit_source(name: str, cfg: DigitStyleConfig, seed: int) -> LabeledSource:
    """Balanced 10-class digit pool in the given style; corrupted samples are noise-only."""
    rng = rng_for(seed, f"digits:{name}")
    render = _render_gray if cfg.channels == 1 else _render_color
    shape = (cfg.image_size, cfg.image_size, cfg.channels)
    images = np.empty((10 * cfg.per_class, *shape), dtype=np.float32)
    labels = np.empty(10 * cfg.per_class, dtype=np.int64)
    i = 0
    for digit in range(10):
        for _ in range(cfg.per_class):
            if cfg.corrupt_prob > 0 and rng.random() < cfg.corrupt_prob:
                images[i] = rng.uniform(0.0, 1.0, size=shape).astype(np.float32)
            else:
                images[i] = render(digit, cfg, rng)
            labels[i] = digit
            i += 1
    return LabeledSource(name=name, data=images, labels=labels, kind=IMAGE)


ANATOMIC_SITES = ("head/neck", "upper extremity", "lower extremity", "torso", "palms/soles", "oral/genital")


def lesion_schema() -> TabularSchema:
    return TabularSchema(
        (
            CategoricalField("gender", ("female", "male")),
            CategoricalField("site", ANATOMIC_SITES),
            NumericField("age", 0.0, 90.0),
        )
    )


_SITE_PROBS = {
    0: (0.12, 0.22, 0.24, 0.36, 0.04, 0.02),   # benign
    1: (0.22, 0.16, 0.14, 0.36, 0.07, 0.05),   # malignant
}
_MALE_PROB = {0: 0.48, 1: 0.66}
_AGE_DIST = {0: (45.0, 15.0), 1: (63.0, 11.0)}


def _render_lesion(malignant: bool, size: int, rng: np.random.Generator) -> np.ndarray:
    skin = np.array([0.92, 0.80, 0.70], dtype=np.float32) + rng.normal(0, 0.03, 3).astype(np.float32)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float32)
    cy = size / 2 + rng.uniform(-2, 2)
    cx = size / 2 + rng.uniform(-2, 2)
    dy, dx = yy - cy, xx - cx
    phi = np.arctan2(dy, dx)
    dist = np.hypot(dy, dx)

    base_r = size * rng.uniform(0.24, 0.36)
    amp = rng.uniform(0.12, 0.30) if malignant else rng.uniform(0.02, 0.07)
    radius = np.full_like(phi, base_r)
    for k in range(2, 2 + int(rng.integers(2, 5))):
        radius += base_r * amp * rng.uniform(0.3, 1.0) * np.sin(k * phi + rng.uniform(0, 2 * np.pi))
    if malignant:
        stretch = rng.uniform(0.15, 0.4)
        radius *= 1.0 + stretch * np.cos(phi + rng.uniform(0, 2 * np.pi))
    mask = (dist < radius).astype(np.float32)

    tone = np.array([0.45, 0.28, 0.20], dtype=np.float32) * rng.uniform(0.8, 1.2)
    img = skin[None, None, :] * (1 - mask[..., None]) + tone[None, None, :] * mask[..., None]
    if malignant:
        inner = (dist < radius * rng.uniform(0.35, 0.6)).astype(np.float32)
        dark = np.array([0.16, 0.10, 0.10], dtype=np.float32) * rng.uniform(0.7, 1.3)
        img = img * (1 - inner[..., None]) + dark[None, None, :] * inner[..., None]
    img += rng.normal(0.0, 0.05, size=img.shape).astype(np.float32)
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def _lesion_record(malignant: bool, missing_prob: float, rng: np.random.Generator) -> dict:
    y = int(malignant)
    record = {
        "gender": "male" if rng.random() < _MALE_PROB[y] else "female",
        "site": ANATOMIC_SITES[rng.choice(len(ANATOMIC_SITES), p=_SITE_PROBS[y])],
        "age": float(np.clip(rng.normal(*_AGE_DIST[y]), 0.0, 90.0)),
    }
    for key in list(record):
        if rng.random() < missing_prob:
            del record[key]
    return record


@dataclass(frozen=True)
class LesionConfig:
    image_size: int = 32
    per_class: int = 400           # balanced pool size per class before subsampling
    missing_prob: float = 0.02


def make_lesion_sources(cfg: LesionConfig, seed: int) -> tuple[LabeledSource, LabeledSource, TabularSchema]:
    """Balanced benign/malignant pools: a dermoscopy-style image source and
    an encoded metadata source with matching labels."""
    rng = rng_for(seed, "lesion")
    schema = lesion_schema()
    n = 2 * cfg.per_class
    labels = np.repeat(np.arange(2, dtype=np.int64), cfg.per_class)
    images = np.empty((n, cfg.image_size, cfg.image_size, 3), dtype=np.float32)
    records = []
    for i, y in enumerate(labels):
        images[i] = _render_lesion(bool(y), cfg.image_size, rng)
        records.append(_lesion_record(bool(y), cfg.missing_prob, rng))
    meta = encode_records(records, schema)
    return (
        LabeledSource(name="lesion_img", data=images, labels=labels, kind=IMAGE),
        LabeledSource(name="lesion_meta", data=meta, labels=labels.copy(), kind=TABULAR),
        schema,
    )
