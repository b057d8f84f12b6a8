"""Phase-1 expert training: mini-batch optimization of the unified objective."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch

from ltmx import losses
from ltmx.data.types import ClassDistribution, PairedDataset
from ltmx.errors import NonFiniteLossError
from ltmx.model.heads import ExpertBundle
from ltmx.seeding import rng_for

TRACE_COLUMNS = ("epoch", "loss_ce", "loss_bal", "loss_inv", "loss_modal_cls", "loss_modal_conf", "loss_unified")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 10
    batch_size: int = 128
    lr: float = 1e-4
    betas: tuple[float, float] = (0.9, 0.999)
    lam: float = 1.0
    seed: int = 0


@dataclass
class TraceRow:
    epoch: int
    loss_ce: float
    loss_bal: float
    loss_inv: float
    loss_modal_cls: float
    loss_modal_conf: float
    loss_unified: float

    def as_tuple(self) -> tuple:
        return (
            self.epoch,
            self.loss_ce,
            self.loss_bal,
            self.loss_inv,
            self.loss_modal_cls,
            self.loss_modal_conf,
            self.loss_unified,
        )


def to_tensors(dataset: PairedDataset) -> tuple[list[torch.Tensor], torch.Tensor]:
    xs = [torch.from_numpy(np.ascontiguousarray(m)).float() for m in dataset.modalities]
    return xs, torch.from_numpy(dataset.labels).long()


@dataclass
class TrainState:
    """Mutable training-progress record carried across checkpoint resume."""

    config: TrainConfig
    class_counts: np.ndarray
    next_epoch: int = 0
    optimizer_arrays: dict[str, np.ndarray] = field(default_factory=dict)


def make_optimizer(bundle: ExpertBundle, config: TrainConfig) -> torch.optim.Adam:
    return torch.optim.Adam(bundle.parameters(), lr=config.lr, betas=config.betas)


def optimizer_to_arrays(optimizer: torch.optim.Adam) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    params = optimizer.param_groups[0]["params"]
    for i, p in enumerate(params):
        state = optimizer.state.get(p)
        if not state:
            continue
        arrays[f"{i}.step"] = np.asarray(float(state["step"]))
        arrays[f"{i}.exp_avg"] = state["exp_avg"].detach().cpu().numpy()
        arrays[f"{i}.exp_avg_sq"] = state["exp_avg_sq"].detach().cpu().numpy()
    return arrays


def arrays_to_optimizer(optimizer: torch.optim.Adam, arrays: dict[str, np.ndarray]) -> None:
    params = optimizer.param_groups[0]["params"]
    for i, p in enumerate(params):
        key = f"{i}.step"
        if key not in arrays:
            continue
        optimizer.state[p] = {
            "step": torch.tensor(float(arrays[key])),
            "exp_avg": torch.from_numpy(arrays[f"{i}.exp_avg"].copy()),
            "exp_avg_sq": torch.from_numpy(arrays[f"{i}.exp_avg_sq"].copy()),
        }


def train_experts(
    bundle: ExpertBundle,
    dataset: PairedDataset,
    distribution: ClassDistribution,
    config: TrainConfig,
    state: TrainState | None = None,
) -> tuple[list[TraceRow], TrainState]:
    """Run `config.epochs` epochs of unified-loss training, resuming from
    `state` when given; returns the per-epoch loss trace and updated state."""
    xs, labels = to_tensors(dataset)
    n = len(labels)
    priors_np, reversed_np = distribution.smoothed()
    priors = torch.from_numpy(priors_np).float()
    reversed_priors = torch.from_numpy(reversed_np).float()

    optimizer = make_optimizer(bundle, config)
    start_epoch = 0
    if state is not None:
        start_epoch = state.next_epoch
        if state.optimizer_arrays:
            arrays_to_optimizer(optimizer, state.optimizer_arrays)

    bundle.train()
    trace: list[TraceRow] = []
    for epoch in range(start_epoch, start_epoch + config.epochs):
        perm = rng_for(config.seed, f"train-shuffle:{epoch}").permutation(n)
        sums = np.zeros(6, dtype=np.float64)
        for b in range(math.ceil(n / config.batch_size)):
            idx = torch.from_numpy(perm[b * config.batch_size : (b + 1) * config.batch_size].copy())
            batch = [x[idx] for x in xs]
            y = labels[idx]

            v1, v2, v3, conf = bundle(batch)
            loss_ce = losses.cross_entropy(v1, y)
            loss_bal = losses.balanced_softmax(v2, y, priors)
            loss_inv = losses.inverse_softmax(v3, y, priors, reversed_priors)
            cls_losses = [losses.cross_entropy(v, y) for v in conf.logits]
            tcp_targets = [losses.true_class_prob(p, y).detach() for p in conf.probs]
            conf_losses = [losses.confidence_mse(g, t) for g, t in zip(conf.tcp_hat, tcp_targets)]
            total = losses.unified(loss_ce + loss_bal + loss_inv, cls_losses, conf_losses, config.lam)

            components = {
                "loss_ce": float(loss_ce),
                "loss_bal": float(loss_bal),
                "loss_inv": float(loss_inv),
                "loss_modal_cls": float(sum(float(v) for v in cls_losses)),
                "loss_modal_conf": float(sum(float(v) for v in conf_losses)),
                "loss_unified": float(total),
            }
            if not all(np.isfinite(v) for v in components.values()):
                raise NonFiniteLossError(epoch, b, components)

            optimizer.zero_grad()
            total.backward()
            optimizer.step()
            sums += len(idx) * np.array(
                [
                    components["loss_ce"],
                    components["loss_bal"],
                    components["loss_inv"],
                    components["loss_modal_cls"],
                    components["loss_modal_conf"],
                    components["loss_unified"],
                ]
            )
        means = sums / n
        trace.append(TraceRow(epoch, *means))

    new_state = TrainState(
        config=config,
        class_counts=distribution.counts.copy(),
        next_epoch=start_epoch + config.epochs,
        optimizer_arrays=optimizer_to_arrays(optimizer),
    )
    return trace, new_state
