"""Expert aggregation: simplex-constrained weights over the three experts.

Weights live as free parameters theta with w = softmax(theta), so every
optimizer step satisfies the simplex constraint exactly. Two learning
regimes:

* test-time stability maximization — unlabeled, augmentation-based
  (all-image modalities only);
* phase-2 supervised fitting — labeled training data, no test-time
  optimization afterwards.

Expert parameters stay frozen in both; only theta moves. Because of that,
each regime precomputes the expert logits once and optimizes theta against
fixed tensors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ltmx.data.augment import AugmentConfig, augment_dataset_views
from ltmx.data.types import PairedDataset
from ltmx.errors import DataError, UnsupportedModalityError
from ltmx.model.heads import NUM_EXPERTS, ExpertBundle
from ltmx.model.training import to_tensors
from ltmx.seeding import rng_for

STABILITY = "stability"
PHASE2_CE = "phase2_ce"


def _softmax_np(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


@dataclass(frozen=True)
class AggregationWeights:
    """Simplex weights (w1, w2, w3) with their unconstrained parameters."""

    theta: np.ndarray   # [3] float64

    def __post_init__(self):
        if self.theta.shape != (NUM_EXPERTS,):
            raise ValueError(f"theta must have shape ({NUM_EXPERTS},)")

    @property
    def w(self) -> np.ndarray:
        return _softmax_np(self.theta.astype(np.float64))

    @classmethod
    def uniform(cls) -> "AggregationWeights":
        return cls(theta=np.zeros(NUM_EXPERTS, dtype=np.float64))

    @classmethod
    def from_weights(cls, w) -> "AggregationWeights":
        w = np.asarray(w, dtype=np.float64)
        if w.shape != (NUM_EXPERTS,) or (w <= 0).any():
            raise ValueError("weights must be 3 positive values")
        w = w / w.sum()
        return cls(theta=np.log(w))

    def argmax(self) -> int:
        """Index of the dominant expert (lowest index wins ties)."""
        return int(np.argmax(self.w))


@dataclass(frozen=True)
class AggregatedPrediction:
    combined: np.ndarray   # [..., K] weighted sum of expert logits
    probs: np.ndarray      # softmax of combined


def aggregate(logits_1, logits_2, logits_3, weights: AggregationWeights) -> AggregatedPrediction:
    """Weighted linear combination of the experts' logits plus its softmax."""
    v1, v2, v3 = (np.asarray(v, dtype=np.float64) for v in (logits_1, logits_2, logits_3))
    if not (v1.shape == v2.shape == v3.shape):
        raise ValueError(f"expert logits shapes differ: {v1.shape}, {v2.shape}, {v3.shape}")
    w = weights.w
    combined = w[0] * v1 + w[1] * v2 + w[2] * v3
    return AggregatedPrediction(combined=combined, probs=_softmax_np(combined))


def stability_objective(pred_a: AggregatedPrediction, pred_b: AggregatedPrediction) -> float:
    """Mean inner product of the two views' probability vectors, in [0, 1]."""
    if pred_a.probs.shape != pred_b.probs.shape:
        raise ValueError("predictions must cover the same samples")
    return float((pred_a.probs * pred_b.probs).sum(axis=-1).mean())


@dataclass(frozen=True)
class WeightLearnConfig:
    epochs: int = 5
    batch_size: int = 128
    lr: float = 1e-2
    betas: tuple[float, float] = (0.9, 0.999)
    seed: int = 0
    stability_on_probs: bool = True   # False scores raw combined logits instead
    debug: bool = False               # assert the simplex invariant every step


def _check_simplex(theta: torch.Tensor) -> None:
    w = torch.softmax(theta, dim=0)
    assert bool((w >= 0).all()) and abs(float(w.sum()) - 1.0) <= 1e-9, "weights left the simplex"


def _combine(logits: torch.Tensor, theta: torch.Tensor) -> torch.Tensor:
    # logits [n, 3, K] -> [n, K]
    w = torch.softmax(theta, dim=0)
    return torch.einsum("j,njk->nk", w, logits)


def _stability_value(logits_a: torch.Tensor, logits_b: torch.Tensor, theta: torch.Tensor, on_probs: bool) -> torch.Tensor:
    ya, yb = _combine(logits_a, theta), _combine(logits_b, theta)
    if on_probs:
        ya, yb = torch.softmax(ya, dim=-1), torch.softmax(yb, dim=-1)
    return (ya * yb).sum(dim=-1).mean()


def _ce_value(logits: torch.Tensor, labels: torch.Tensor, theta: torch.Tensor) -> torch.Tensor:
    combined = _combine(logits, theta)
    logp = combined - torch.logsumexp(combined, dim=-1, keepdim=True)
    return -logp.gather(-1, labels.reshape(-1, 1)).mean()


def _optimize_theta(
    objective,            # theta, batch indices -> scalar to MINIMIZE
    full_objective,       # theta -> float to report
    n: int,
    config: WeightLearnConfig,
    maximize: bool,
) -> tuple[AggregationWeights, list[float]]:
    theta = torch.zeros(NUM_EXPERTS, dtype=torch.float64, requires_grad=True)
    optimizer = torch.optim.Adam([theta], lr=config.lr, betas=config.betas)
    sign = 1.0 if maximize else -1.0
    trace = [full_objective(theta)]
    best_value, best_theta = trace[0], theta.detach().clone()
    for epoch in range(config.epochs):
        perm = rng_for(config.seed, f"weights-shuffle:{epoch}").permutation(n)
        for b in range(math.ceil(n / config.batch_size)):
            idx = torch.from_numpy(perm[b * config.batch_size : (b + 1) * config.batch_size].copy())
            loss = objective(theta, idx)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            if config.debug:
                _check_simplex(theta.detach())
        value = full_objective(theta)
        trace.append(value)
        if sign * value > sign * best_value:
            best_value, best_theta = value, theta.detach().clone()
    return AggregationWeights(theta=best_theta.numpy().copy()), trace


def learn_weights_stability(
    logits_a: np.ndarray, logits_b: np.ndarray, config: WeightLearnConfig
) -> tuple[AggregationWeights, list[float]]:
    """Maximize prediction stability between two fixed view-logit stacks [n, 3, K]."""
    la = torch.as_tensor(np.asarray(logits_a), dtype=torch.float64)
    lb = torch.as_tensor(np.asarray(logits_b), dtype=torch.float64)
    if la.shape != lb.shape or la.ndim != 3 or la.shape[1] != NUM_EXPERTS:
        raise ValueError(f"expected matching [n, {NUM_EXPERTS}, K] stacks, got {tuple(la.shape)} and {tuple(lb.shape)}")

    def batch_loss(theta, idx):
        return -_stability_value(la[idx], lb[idx], theta, config.stability_on_probs)

    def full_value(theta):
        with torch.no_grad():
            return float(_stability_value(la, lb, theta, config.stability_on_probs))

    return _optimize_theta(batch_loss, full_value, la.shape[0], config, maximize=True)


def learn_weights_ce(
    logits: np.ndarray, labels: np.ndarray, config: WeightLearnConfig
) -> tuple[AggregationWeights, list[float]]:
    """Minimize cross-entropy of the combined logits on labeled data.

    The trace holds the full-set CE per epoch (entry 0 = at uniform init);
    the weights returned come from the best epoch.
    """
    lv = torch.as_tensor(np.asarray(logits), dtype=torch.float64)
    y = torch.as_tensor(np.asarray(labels), dtype=torch.long)
    if lv.ndim != 3 or lv.shape[1] != NUM_EXPERTS or lv.shape[0] != y.shape[0]:
        raise ValueError(f"expected [n, {NUM_EXPERTS}, K] logits aligned with labels, got {tuple(lv.shape)}")
    if len(y) == 0:
        raise DataError("cannot fit aggregation weights on an empty set")

    def batch_loss(theta, idx):
        return _ce_value(lv[idx], y[idx], theta)

    def full_value(theta):
        with torch.no_grad():
            return float(_ce_value(lv, y, theta))

    return _optimize_theta(batch_loss, full_value, lv.shape[0], config, maximize=False)


def expert_logits(bundle: ExpertBundle, dataset: PairedDataset, batch_size: int = 256) -> np.ndarray:
    """Frozen forward pass over a dataset; returns [n, 3, K] float64."""
    xs, _ = to_tensors(dataset)
    out = []
    bundle.eval()
    with torch.no_grad():
        for b in range(math.ceil(len(dataset) / batch_size)):
            sl = slice(b * batch_size, (b + 1) * batch_size)
            v1, v2, v3, _ = bundle([x[sl] for x in xs])
            out.append(torch.stack([v1, v2, v3], dim=1).double().numpy())
    return np.concatenate(out, axis=0)


def adapt_test_time(
    dataset: PairedDataset,
    bundle: ExpertBundle,
    augment: AugmentConfig,
    config: WeightLearnConfig,
) -> tuple[AggregationWeights, list[float]]:
    """Case-1 weight learning on an unlabeled all-image test set.

    Generates two augmented views per sample, precomputes the frozen
    experts' logits for both, and ascends the stability objective in theta.
    Expert parameters are untouched (asserted via parameter hash).
    """
    if not dataset.all_image():
        raise UnsupportedModalityError(
            "test-time adaptation needs augmentable (image) modalities only; "
            "use phase-2 supervised weight fitting for mixed inputs"
        )
    before = bundle.parameter_hash()
    rng = rng_for(config.seed, "adapt-views")
    view_a, view_b = augment_dataset_views(dataset, augment, rng)
    logits_a = expert_logits(bundle, _with_modalities(dataset, view_a))
    logits_b = expert_logits(bundle, _with_modalities(dataset, view_b))
    weights, trace = learn_weights_stability(logits_a, logits_b, config)
    if bundle.parameter_hash() != before:
        raise AssertionError("expert parameters changed during test-time adaptation")
    return weights, trace


def phase2_fit(
    dataset: PairedDataset,
    bundle: ExpertBundle,
    config: WeightLearnConfig,
) -> tuple[AggregationWeights, list[float]]:
    """Case-2 weight learning: supervised CE fitting on the labeled training set."""
    if len(dataset) == 0:
        raise DataError("cannot fit aggregation weights on an empty training set")
    before = bundle.parameter_hash()
    logits = expert_logits(bundle, dataset)
    weights, trace = learn_weights_ce(logits, dataset.labels, config)
    if bundle.parameter_hash() != before:
        raise AssertionError("expert parameters changed during phase-2 fitting")
    return weights, trace


def _with_modalities(dataset: PairedDataset, modalities: list[np.ndarray]) -> PairedDataset:
    return PairedDataset(
        modalities=modalities,
        labels=dataset.labels,
        num_classes=dataset.num_classes,
        kinds=dataset.kinds,
        source_names=dataset.source_names,
        refs=None,
    )


def save_weights(
    path: str | Path,
    weights: AggregationWeights,
    checkpoint_hash: str,
    split_id: str,
    seed: int,
    method: str,
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    w = weights.w
    lines = [
        f"# checkpoint={checkpoint_hash} split={split_id} seed={seed} method={method}",
        f"w1={w[0]!r}",
        f"w2={w[1]!r}",
        f"w3={w[2]!r}",
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_weights(path: str | Path) -> tuple[AggregationWeights, dict[str, str]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if len(lines) < 4 or not lines[0].startswith("#"):
        raise DataError(f"{path}: expected a provenance header plus w1/w2/w3 lines")
    provenance = dict(tok.split("=", 1) for tok in lines[0].lstrip("# ").split())
    values = {}
    for line in lines[1:4]:
        key, _, val = line.partition("=")
        values[key.strip()] = float(val)
    try:
        w = np.array([values["w1"], values["w2"], values["w3"]], dtype=np.float64)
    except KeyError as exc:
        raise DataError(f"{path}: missing weight line {exc}") from None
    return AggregationWeights.from_weights(w), provenance
