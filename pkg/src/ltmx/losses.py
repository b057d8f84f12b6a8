"""Scalar training objectives.

Three expert losses (plain, prior-shifted, and inversely prior-shifted
cross-entropy), their composite, the true-class-probability confidence score
with its regression loss, and the unified objective that ties the expert
composite to the per-modality classification and confidence terms.

All functions accept a single instance ([K] logits / int label) or a batch
([n, K] / [n]); batch reductions are arithmetic means. Tensors keep their
dtype, so float64 inputs give float64 losses.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
import torch


def _as_tensor(x, like: torch.Tensor | None = None) -> torch.Tensor:
    if isinstance(x, torch.Tensor):
        return x
    t = torch.as_tensor(np.asarray(x))
    if like is not None and t.dtype != like.dtype and t.is_floating_point():
        t = t.to(like.dtype)
    return t


def _log_probs(logits: torch.Tensor) -> torch.Tensor:
    return logits - torch.logsumexp(logits, dim=-1, keepdim=True)


def _gather_label(values: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    if values.ndim == 1:
        return values[labels]
    return values.gather(-1, labels.reshape(-1, 1)).squeeze(-1)


def cross_entropy(logits, labels) -> torch.Tensor:
    """Mean softmax cross-entropy, -log softmax(v)[y]."""
    logits = _as_tensor(logits)
    labels = _as_tensor(labels).long()
    return -_gather_label(_log_probs(logits), labels).mean()


def _check_positive(priors: torch.Tensor, name: str) -> None:
    if bool((priors <= 0).any()):
        raise ValueError(f"{name} contain non-positive entries; smooth the priors before the log shift")


def balanced_softmax(logits, labels, priors) -> torch.Tensor:
    """Cross-entropy on logits shifted by log priors (counters head-class bias)."""
    logits = _as_tensor(logits)
    priors = _as_tensor(priors, like=logits)
    _check_positive(priors, "priors")
    return cross_entropy(logits + torch.log(priors), labels)


def inverse_softmax(logits, labels, priors, reversed_priors) -> torch.Tensor:
    """Cross-entropy on logits shifted by log priors - log reversed priors
    (specializes for inversely long-tailed data)."""
    logits = _as_tensor(logits)
    priors = _as_tensor(priors, like=logits)
    reversed_priors = _as_tensor(reversed_priors, like=logits)
    _check_positive(priors, "priors")
    _check_positive(reversed_priors, "reversed priors")
    return cross_entropy(logits + torch.log(priors) - torch.log(reversed_priors), labels)


def experts_composite(logits_1, logits_2, logits_3, labels, priors, reversed_priors) -> torch.Tensor:
    """Sum of the three expert losses, each fed its own expert's logits."""
    return (
        cross_entropy(logits_1, labels)
        + balanced_softmax(logits_2, labels, priors)
        + inverse_softmax(logits_3, labels, priors, reversed_priors)
    )


def true_class_prob(probs, labels) -> torch.Tensor:
    """Probability mass the categorical distribution assigns to the true class."""
    probs = _as_tensor(probs)
    labels = _as_tensor(labels).long()
    return _gather_label(probs, labels)


def confidence_mse(tcp_hat, tcp_true) -> torch.Tensor:
    """Mean squared error between estimated and actual true-class probability."""
    tcp_hat = _as_tensor(tcp_hat)
    tcp_true = _as_tensor(tcp_true, like=tcp_hat)
    return ((tcp_hat - tcp_true) ** 2).mean()


def unified(fusion_loss, per_modality_cls_losses: Sequence, per_modality_conf_losses: Sequence, lam: float) -> torch.Tensor:
    """fusion + lam * sum_m (classification_m + confidence_m)."""
    if lam < 0:
        raise ValueError("loss weight lam must be nonnegative")
    if len(per_modality_cls_losses) != len(per_modality_conf_losses):
        raise ValueError(
            f"per-modality loss lists differ in length: "
            f"{len(per_modality_cls_losses)} vs {len(per_modality_conf_losses)}"
        )
    total = _as_tensor(fusion_loss)
    for cls_loss, conf_loss in zip(per_modality_cls_losses, per_modality_conf_losses):
        total = total + lam * (_as_tensor(cls_loss) + _as_tensor(conf_loss))
    return total
