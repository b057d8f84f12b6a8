"""The multi-expert network: classifier module, confidence-weighted fusion,
and three identically shaped expert heads over the fused representation."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Sequence

import torch
from torch import nn

from ltmx.data.tabular import TabularSchema
from ltmx.errors import ConfigurationError
from ltmx.model.encoders import (
    ImageModalityConfig,
    ModalityConfig,
    TabularModalityConfig,
    build_encoder,
    init_encoder,
    init_head,
)

NUM_EXPERTS = 3


@dataclass(frozen=True)
class ArchConfig:
    """Everything needed to rebuild the network shape from a checkpoint."""

    num_classes: int
    modalities: tuple[ModalityConfig, ...]
    expert_hidden: int = 128
    use_tcp: bool = True
    per_expert_fusion: bool = False

    def to_dict(self) -> dict:
        mods = []
        for m in self.modalities:
            if isinstance(m, ImageModalityConfig):
                mods.append(
                    {
                        "kind": "image",
                        "height": m.height,
                        "width": m.width,
                        "channels_in": m.channels_in,
                        "conv_channels": list(m.conv_channels),
                        "fc_dims": list(m.fc_dims),
                    }
                )
            else:
                mods.append(
                    {
                        "kind": "tabular",
                        "schema": m.schema.to_dict(),
                        "embed_dim": m.embed_dim,
                        "feature_dim": m.feature_dim,
                    }
                )
        return {
            "num_classes": self.num_classes,
            "modalities": mods,
            "expert_hidden": self.expert_hidden,
            "use_tcp": self.use_tcp,
            "per_expert_fusion": self.per_expert_fusion,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ArchConfig":
        mods: list[ModalityConfig] = []
        for m in payload["modalities"]:
            if m["kind"] == "image":
                mods.append(
                    ImageModalityConfig(
                        height=m["height"],
                        width=m["width"],
                        channels_in=m["channels_in"],
                        conv_channels=tuple(m["conv_channels"]),
                        fc_dims=tuple(m["fc_dims"]),
                    )
                )
            elif m["kind"] == "tabular":
                mods.append(
                    TabularModalityConfig(
                        schema=TabularSchema.from_dict(m["schema"]),
                        embed_dim=m["embed_dim"],
                        feature_dim=m["feature_dim"],
                    )
                )
            else:
                raise ConfigurationError(f"unknown modality kind {m['kind']!r} in checkpoint")
        return cls(
            num_classes=payload["num_classes"],
            modalities=tuple(mods),
            expert_hidden=payload["expert_hidden"],
            use_tcp=payload["use_tcp"],
            per_expert_fusion=payload.get("per_expert_fusion", False),
        )


@dataclass
class ConfidenceOutputs:
    """Per-modality classifier-module outputs for one batch."""

    logits: list[torch.Tensor]    # each [n, K]
    probs: list[torch.Tensor]     # softmax of logits
    tcp_hat: list[torch.Tensor]   # each [n], in [0, 1]


class ModalityHeads(nn.Module):
    """Classification and confidence heads sharing one modality's encoder output."""

    def __init__(self, feature_dim: int, num_classes: int):
        super().__init__()
        self.classify = nn.Linear(feature_dim, num_classes)
        self.confidence = nn.Linear(feature_dim, 1)

    def forward(self, features: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        logits = self.classify(features)
        tcp_hat = torch.sigmoid(self.confidence(features)).squeeze(-1)
        return logits, tcp_hat


class ClassifierModule(nn.Module):
    """One pair of heads per modality, producing predictions and estimated
    true-class probabilities used to weight the fusion."""

    def __init__(self, feature_dims: Sequence[int], num_classes: int):
        super().__init__()
        self.heads = nn.ModuleList(ModalityHeads(dim, num_classes) for dim in feature_dims)

    def forward(self, features: Sequence[torch.Tensor]) -> ConfidenceOutputs:
        if len(features) != len(self.heads):
            raise ValueError(f"expected {len(self.heads)} modality features, got {len(features)}")
        logits, tcp_hat = [], []
        for head, h in zip(self.heads, features):
            v, g = head(h)
            logits.append(v)
            tcp_hat.append(g)
        return ConfidenceOutputs(logits=logits, probs=[torch.softmax(v, dim=-1) for v in logits], tcp_hat=tcp_hat)


def fuse(features: Sequence[torch.Tensor], tcp_hats: Sequence[torch.Tensor]) -> torch.Tensor:
    """Concatenate modality features, each block scaled by its confidence scalar."""
    if len(features) != len(tcp_hats):
        raise ValueError(f"{len(features)} feature blocks vs {len(tcp_hats)} confidence scalars")
    blocks = []
    for h, g in zip(features, tcp_hats):
        g = g if isinstance(g, torch.Tensor) else torch.as_tensor(g, dtype=h.dtype)
        if g.ndim == h.ndim - 1:
            g = g.unsqueeze(-1)
        elif g.ndim != h.ndim:
            raise ValueError(f"confidence shape {tuple(g.shape)} incompatible with features {tuple(h.shape)}")
        blocks.append(h * g)
    return torch.cat(blocks, dim=-1)


class ExpertHead(nn.Module):
    def __init__(self, in_dim: int, num_classes: int, hidden: int = 128):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(in_dim, hidden), nn.ReLU(), nn.Linear(hidden, num_classes))

    def forward(self, fused: torch.Tensor) -> torch.Tensor:
        return self.net(fused)


class ExpertBundle(nn.Module):
    """Shared encoders + classifier module + three independent expert heads.

    Expert 1 is trained for the long-tailed training distribution, expert 2
    for a uniform one, expert 3 for the inverse long tail; the heads are
    architecturally identical with independent parameters.
    """

    def __init__(self, arch: ArchConfig):
        super().__init__()
        self.arch = arch
        self.encoders = nn.ModuleList(build_encoder(m) for m in arch.modalities)
        dims = [enc.feature_dim for enc in self.encoders]
        self.classifier = ClassifierModule(dims, arch.num_classes)
        fused_dim = sum(dims)
        self.experts = nn.ModuleList(
            ExpertHead(fused_dim, arch.num_classes, arch.expert_hidden) for _ in range(NUM_EXPERTS)
        )
        if arch.per_expert_fusion:
            self.expert_encoders = nn.ModuleList(
                nn.ModuleList(build_encoder(m) for m in arch.modalities) for _ in range(NUM_EXPERTS)
            )
        else:
            self.expert_encoders = None
        self.reset_parameters()

    def reset_parameters(self) -> None:
        for enc in self.encoders:
            init_encoder(enc)
        if self.expert_encoders is not None:
            for stack in self.expert_encoders:
                for enc in stack:
                    init_encoder(enc)
        init_head(self.classifier)
        for expert in self.experts:
            init_head(expert)

    @property
    def num_modalities(self) -> int:
        return len(self.encoders)

    def encode(self, modalities: Sequence[torch.Tensor]) -> list[torch.Tensor]:
        if len(modalities) != len(self.encoders):
            raise ValueError(f"expected {len(self.encoders)} modalities, got {len(modalities)}")
        return [enc(x) for enc, x in zip(self.encoders, modalities)]

    def confidence_forward(self, modalities: Sequence[torch.Tensor]) -> ConfidenceOutputs:
        return self.classifier(self.encode(modalities))

    def forward(
        self, modalities: Sequence[torch.Tensor]
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, ConfidenceOutputs]:
        features = self.encode(modalities)
        conf = self.classifier(features)
        if self.arch.use_tcp:
            weights = conf.tcp_hat
        else:
            weights = [torch.ones_like(g) for g in conf.tcp_hat]
        if self.expert_encoders is None:
            fused = fuse(features, weights)
            v1, v2, v3 = (expert(fused) for expert in self.experts)
        else:
            v1, v2, v3 = (
                expert(fuse([enc(x) for enc, x in zip(stack, modalities)], weights))
                for expert, stack in zip(self.experts, self.expert_encoders)
            )
        return v1, v2, v3, conf

    def parameter_hash(self) -> str:
        digest = hashlib.sha256()
        for name, param in sorted(self.named_parameters()):
            digest.update(name.encode())
            digest.update(param.detach().cpu().numpy().tobytes())
        return digest.hexdigest()
