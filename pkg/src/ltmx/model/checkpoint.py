"""Versioned checkpoint archive: `ltmx-ckpt-v1`.

A zip with a plain-text header entry, JSON manifests for the architecture
and training state, and npz payloads for model parameters and optimizer
moments. No pickled objects, fixed entry timestamps.
"""

from __future__ import annotations

import hashlib
import io
import json
import zipfile
from pathlib import Path

import numpy as np
import torch

from ltmx.errors import DataError
from ltmx.model.heads import ArchConfig, ExpertBundle
from ltmx.model.training import TrainConfig, TrainState

FORMAT_TAG = "ltmx-ckpt-v1"
_EPOCH_TS = (1980, 1, 1, 0, 0, 0)


def _write_entry(zf: zipfile.ZipFile, name: str, payload: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_EPOCH_TS)
    info.compress_type = zipfile.ZIP_DEFLATED
    zf.writestr(info, payload)


def _npz_bytes(arrays: dict[str, np.ndarray]) -> bytes:
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    return buf.getvalue()


def save_checkpoint(path: str | Path, bundle: ExpertBundle, state: TrainState) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    params = {name: tensor.detach().cpu().numpy() for name, tensor in bundle.state_dict().items()}
    train_state = {
        "next_epoch": state.next_epoch,
        "class_counts": state.class_counts.tolist(),
        "config": {
            "epochs": state.config.epochs,
            "batch_size": state.config.batch_size,
            "lr": state.config.lr,
            "betas": list(state.config.betas),
            "lam": state.config.lam,
            "seed": state.config.seed,
        },
    }
    with zipfile.ZipFile(path, "w") as zf:
        _write_entry(zf, "header", (FORMAT_TAG + "\n").encode())
        _write_entry(zf, "arch.json", json.dumps(bundle.arch.to_dict(), indent=2, sort_keys=True).encode())
        _write_entry(zf, "train_state.json", json.dumps(train_state, indent=2, sort_keys=True).encode())
        _write_entry(zf, "params.npz", _npz_bytes(params))
        if state.optimizer_arrays:
            _write_entry(zf, "optimizer.npz", _npz_bytes(state.optimizer_arrays))


def load_checkpoint(path: str | Path) -> tuple[ExpertBundle, TrainState]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    with zipfile.ZipFile(path) as zf:
        names = set(zf.namelist())
        if "header" not in names or zf.read("header").decode().strip() != FORMAT_TAG:
            raise DataError(f"{path}: not a {FORMAT_TAG} checkpoint")
        arch = ArchConfig.from_dict(json.loads(zf.read("arch.json")))
        raw_state = json.loads(zf.read("train_state.json"))
        with np.load(io.BytesIO(zf.read("params.npz"))) as npz:
            params = {k: npz[k] for k in npz.files}
        optimizer_arrays = {}
        if "optimizer.npz" in names:
            with np.load(io.BytesIO(zf.read("optimizer.npz"))) as npz:
                optimizer_arrays = {k: npz[k] for k in npz.files}

    bundle = ExpertBundle(arch)
    bundle.load_state_dict({k: torch.from_numpy(v.copy()) for k, v in params.items()})
    cfg = raw_state["config"]
    state = TrainState(
        config=TrainConfig(
            epochs=cfg["epochs"],
            batch_size=cfg["batch_size"],
            lr=cfg["lr"],
            betas=tuple(cfg["betas"]),
            lam=cfg["lam"],
            seed=cfg["seed"],
        ),
        class_counts=np.asarray(raw_state["class_counts"], dtype=np.int64),
        next_epoch=raw_state["next_epoch"],
        optimizer_arrays=optimizer_arrays,
    )
    return bundle, state


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
