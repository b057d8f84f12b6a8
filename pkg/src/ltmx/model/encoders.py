"""Per-modality feature encoders.

Image: two conv + max-pool stages, flattened, optionally followed by a small
fully connected stack. Tabular: one embedding per categorical field
concatenated with the numeric slots, then a single affine + nonlinearity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import torch
from torch import nn

from ltmx.data.tabular import TabularSchema


@dataclass(frozen=True)
class ImageModalityConfig:
    height: int
    width: int
    channels_in: int
    conv_channels: tuple[int, int] = (16, 32)
    fc_dims: tuple[int, ...] = ()
    kind: str = field(default="image", init=False)


@dataclass(frozen=True)
class TabularModalityConfig:
    schema: TabularSchema
    embed_dim: int = 8
    feature_dim: int = 32
    kind: str = field(default="tabular", init=False)


ModalityConfig = ImageModalityConfig | TabularModalityConfig


class ImageEncoder(nn.Module):
    def __init__(self, cfg: ImageModalityConfig):
        super().__init__()
        c1, c2 = cfg.conv_channels
        self.conv1 = nn.Conv2d(cfg.channels_in, c1, kernel_size=3, padding=1)
        self.conv2 = nn.Conv2d(c1, c2, kernel_size=3, padding=1)
        self.pool = nn.MaxPool2d(2)
        h, w = cfg.height // 4, cfg.width // 4
        width = c2 * h * w
        fc = []
        for dim in cfg.fc_dims:
            fc.extend([nn.Linear(width, dim), nn.ReLU()])
            width = dim
        self.fc = nn.Sequential(*fc)
        self.feature_dim = width

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # input is batch-first HWC; conv kernels want NCHW
        x = x.permute(0, 3, 1, 2)
        x = self.pool(torch.relu(self.conv1(x)))
        x = self.pool(torch.relu(self.conv2(x)))
        return self.fc(x.flatten(1))


class TabularEncoder(nn.Module):
    def __init__(self, cfg: TabularModalityConfig):
        super().__init__()
        self.cat_positions = [i for i, _ in cfg.schema.categorical_positions()]
        self.num_positions = cfg.schema.numeric_positions()
        self.embeddings = nn.ModuleList(
            nn.Embedding(f.cardinality, cfg.embed_dim) for _, f in cfg.schema.categorical_positions()
        )
        width = len(self.cat_positions) * cfg.embed_dim + len(self.num_positions)
        self.proj = nn.Linear(width, cfg.feature_dim)
        self.feature_dim = cfg.feature_dim

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        parts = [emb(x[:, pos].long()) for emb, pos in zip(self.embeddings, self.cat_positions)]
        if self.num_positions:
            parts.append(x[:, self.num_positions])
        return torch.relu(self.proj(torch.cat(parts, dim=1)))


def build_encoder(cfg: ModalityConfig) -> nn.Module:
    if isinstance(cfg, ImageModalityConfig):
        return ImageEncoder(cfg)
    return TabularEncoder(cfg)


def init_encoder(module: nn.Module) -> None:
    """Fan-in-scaled uniform weights, zero biases, for encoder layers."""
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.Linear)):
            nn.init.kaiming_uniform_(m.weight, a=math.sqrt(5))
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, nn.Embedding):
            bound = 1.0 / math.sqrt(m.embedding_dim)
            nn.init.uniform_(m.weight, -bound, bound)


def init_head(module: nn.Module, std: float = 1e-3) -> None:
    """Near-zero normal weights, zero biases, for classification/confidence/expert heads."""
    for m in module.modules():
        if isinstance(m, nn.Linear):
            nn.init.normal_(m.weight, mean=0.0, std=std)
            nn.init.zeros_(m.bias)
