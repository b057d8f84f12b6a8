"""Line-oriented manifest files recording exactly which samples a split uses.

Format (plain text, LF endings, diff-able):

    version=1 seed=<int> kind=<forward|uniform|backward> ratio=<float>
    <class> <sample_id> <sourceA>:<indexA> <sourceB>:<indexB>
    ...

One record line per sample; single-modality datasets carry one ref column.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ltmx.data.types import DistributionSpec, LabeledSource, PairedDataset
from ltmx.errors import ConfigurationError, DataError

_VERSION = 1


@dataclass(frozen=True)
class ManifestRecord:
    label: int
    sample_id: int
    refs: tuple[tuple[str, int], ...]   # (source name, index) per modality


@dataclass(frozen=True)
class Manifest:
    seed: int
    spec: DistributionSpec
    records: tuple[ManifestRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    @classmethod
    def from_dataset(cls, dataset: PairedDataset, spec: DistributionSpec, seed: int) -> "Manifest":
        if dataset.refs is None or dataset.source_names is None:
            raise DataError("dataset carries no source refs; cannot build a manifest")
        records = tuple(
            ManifestRecord(
                label=int(dataset.labels[i]),
                sample_id=i,
                refs=tuple(
                    (dataset.source_names[m], int(dataset.refs[m][i]))
                    for m in range(dataset.num_modalities)
                ),
            )
            for i in range(len(dataset))
        )
        return cls(seed=seed, spec=spec, records=records)


def write_manifest(manifest: Manifest, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"version={_VERSION} seed={manifest.seed} kind={manifest.spec.kind} ratio={manifest.spec.ratio:g}"
    ]
    for rec in manifest.records:
        refs = " ".join(f"{name}:{idx}" for name, idx in rec.refs)
        lines.append(f"{rec.label} {rec.sample_id} {refs}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise DataError(f"empty manifest {path}")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    try:
        if int(header["version"]) != _VERSION:
            raise DataError(f"unsupported manifest version {header['version']} in {path}")
        seed = int(header["seed"])
        spec = DistributionSpec(header["kind"], float(header["ratio"]))
    except (KeyError, ValueError) as exc:
        raise DataError(f"malformed manifest header in {path}: {exc}") from None

    records = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) < 3:
            raise DataError(f"{path}:{ln}: expected '<class> <id> <ref>...'")
        refs = []
        for token in parts[2:]:
            name, _, idx = token.rpartition(":")
            if not name:
                raise DataError(f"{path}:{ln}: bad ref {token!r}")
            refs.append((name, int(idx)))
        records.append(ManifestRecord(label=int(parts[0]), sample_id=int(parts[1]), refs=tuple(refs)))
    return Manifest(seed=seed, spec=spec, records=tuple(records))


def materialize(manifest: Manifest, sources: dict[str, LabeledSource]) -> PairedDataset:
    """Rebuild the dataset a manifest describes from its named sources."""
    if not manifest.records:
        raise DataError("manifest has no records")
    names = [name for name, _ in manifest.records[0].refs]
    for name in names:
        if name not in sources:
            raise ConfigurationError(f"manifest references unknown source {name!r}")
    indices = [np.array([rec.refs[m][1] for rec in manifest.records], dtype=np.int64) for m in range(len(names))]
    labels = np.array([rec.label for rec in manifest.records], dtype=np.int64)
    num_classes = len({int(lbl) for lbl in sources[names[0]].labels})
    for m, name in enumerate(names):
        src = sources[name]
        if indices[m].max() >= len(src):
            raise DataError(f"manifest index {int(indices[m].max())} out of range for source {name}")
        if not np.array_equal(src.labels[indices[m]], labels):
            raise DataError(f"labels in source {name} disagree with the manifest")
    return PairedDataset(
        modalities=[sources[name].data[indices[m]] for m, name in enumerate(names)],
        labels=labels,
        num_classes=num_classes,
        kinds=tuple(sources[name].kind for name in names),
        source_names=tuple(names),
        refs=indices,
    )
