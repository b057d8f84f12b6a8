"""Declarative experiment configuration.

Configs are hand-editable key-value text (INI sections) that parse into
frozen dataclasses; serialization is canonical so parse -> save -> parse
round-trips to an equal config. A JSON export is provided for tooling.
"""

from __future__ import annotations

import configparser
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ltmx.data.augment import AugmentConfig
from ltmx.data.types import DistributionSpec
from ltmx.errors import ConfigurationError

FAMILIES = ("digits", "lesion", "files")
VARIANTS = ("proposed", "no_tcp", "single_modality")
CASE_TEST_TIME = 1
CASE_TWO_PHASE = 2


@dataclass(frozen=True)
class DataConfig:
    family: str = "digits"
    num_classes: int = 10
    head_train: int = 300
    head_test: int = 80
    source_seed: int = 1234
    # digits family nuisance parameters (modality a = grayscale, b = color)
    noise_a: float = 0.18
    noise_b: float = 0.12
    corrupt_b: float = 0.25
    clutter_b: bool = True
    image_size_a: int = 28
    image_size_b: int = 32
    # lesion family
    train_frac: float = 0.8
    missing_prob: float = 0.02
    # files family (IDX images/labels for modality a, 32x32 MATLAB for modality b)
    a_train_images: str = ""
    a_train_labels: str = ""
    a_test_images: str = ""
    a_test_labels: str = ""
    b_train_mat: str = ""
    b_test_mat: str = ""


@dataclass(frozen=True)
class ModelConfig:
    conv_channels: tuple[int, int] = (16, 32)
    fc_dims: tuple[int, ...] = ()
    tab_embed_dim: int = 8
    tab_feature_dim: int = 32
    expert_hidden: int = 128
    per_expert_fusion: bool = False


@dataclass(frozen=True)
class OptimConfig:
    epochs: int = 10
    batch_size: int = 128
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    lam: float = 1.0


@dataclass(frozen=True)
class AdaptOptimConfig:
    epochs: int = 5
    batch_size: int = 128
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    stability_on_probs: bool = True


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    case: int = CASE_TEST_TIME
    out: str = "out"
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    train_irs: tuple[float, ...] = (10.0,)
    test_specs: tuple[DistributionSpec, ...] = ()
    variants: tuple[str, ...] = ("proposed",)
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    optim: OptimConfig = field(default_factory=OptimConfig)
    adapt: AdaptOptimConfig = field(default_factory=AdaptOptimConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)

    def validate(self) -> None:
        if self.case not in (CASE_TEST_TIME, CASE_TWO_PHASE):
            raise ConfigurationError(f"experiment.case: must be 1 or 2, got {self.case}")
        if self.data.family not in FAMILIES:
            raise ConfigurationError(f"data.family: unknown family {self.data.family!r}")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigurationError(f"experiment.variants: unknown variant {v!r}")
        if not self.seeds:
            raise ConfigurationError("experiment.seeds: at least one seed required")
        if not self.train_irs:
            raise ConfigurationError("experiment.train_irs: at least one imbalance ratio required")
        if any(ir < 1 for ir in self.train_irs):
            raise ConfigurationError("experiment.train_irs: ratios must be >= 1")
        if self.data.family == "lesion":
            if self.case != CASE_TWO_PHASE:
                raise ConfigurationError(
                    "experiment.case: the lesion family contains a tabular modality, which cannot be "
                    "augmented at test time; use case 2"
                )
            if self.test_specs:
                raise ConfigurationError(
                    "experiment.test_specs: the lesion family evaluates on its matched held-out split; "
                    "leave test_specs empty"
                )
            if not 0 < self.data.train_frac < 1:
                raise ConfigurationError("data.train_frac: must be in (0, 1)")
        else:
            if not self.test_specs:
                raise ConfigurationError("experiment.test_specs: at least one test distribution required")
        if self.data.family == "files":
            missing = [
                key
                for key in (
                    "a_train_images",
                    "a_train_labels",
                    "a_test_images",
                    "a_test_labels",
                    "b_train_mat",
                    "b_test_mat",
                )
                if not getattr(self.data, key)
            ]
            if missing:
                raise ConfigurationError(f"data: files family needs paths for {', '.join(missing)}")
        if self.data.head_train < 1 or self.data.head_test < 1:
            raise ConfigurationError("data.head_train/head_test: must be >= 1")
        if self.optim.lam < 0:
            raise ConfigurationError("optim.lam: must be nonnegative")
        if len(self.model.conv_channels) != 2:
            raise ConfigurationError("model.conv_channels: exactly two conv stages are supported")


def _parse_int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.split(",") if tok.strip())


def _parse_float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.split(",") if tok.strip())


def _parse_str_list(raw: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in raw.split(",") if tok.strip())


class _Section:
    """configparser section wrapper that yields field-level error messages."""

    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.section = parser[name] if parser.has_section(name) else {}

    def get(self, key: str, cast, default):
        if key not in self.section:
            return default
        raw = self.section[key]
        try:
            return cast(raw)
        except (ValueError, ConfigurationError) as exc:
            raise ConfigurationError(f"[{self.name}] {key}: cannot parse {raw!r} ({exc})") from None


def _parse_bool(raw: str) -> bool:
    val = raw.strip().lower()
    if val in ("true", "yes", "1", "on"):
        return True
    if val in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def loads_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config parse error: {exc}") from None

    exp = _Section(parser, "experiment")
    data = _Section(parser, "data")
    model = _Section(parser, "model")
    optim = _Section(parser, "optim")
    adapt = _Section(parser, "adapt")
    augment = _Section(parser, "augment")

    config = ExperimentConfig(
        name=exp.get("name", str, "experiment"),
        case=exp.get("case", int, CASE_TEST_TIME),
        out=exp.get("out", str, "out"),
        seeds=exp.get("seeds", _parse_int_list, (1, 2, 3, 4, 5)),
        train_irs=exp.get("train_irs", _parse_float_list, (10.0,)),
        test_specs=exp.get(
            "test_specs",
            lambda raw: tuple(DistributionSpec.parse(tok) for tok in _parse_str_list(raw)),
            (),
        ),
        variants=exp.get("variants", _parse_str_list, ("proposed",)),
        data=DataConfig(
            family=data.get("family", str, "digits"),
            num_classes=data.get("num_classes", int, 10),
            head_train=data.get("head_train", int, 300),
            head_test=data.get("head_test", int, 80),
            source_seed=data.get("source_seed", int, 1234),
            noise_a=data.get("noise_a", float, 0.18),
            noise_b=data.get("noise_b", float, 0.12),
            corrupt_b=data.get("corrupt_b", float, 0.25),
            clutter_b=data.get("clutter_b", _parse_bool, True),
            image_size_a=data.get("image_size_a", int, 28),
            image_size_b=data.get("image_size_b", int, 32),
            train_frac=data.get("train_frac", float, 0.8),
            missing_prob=data.get("missing_prob", float, 0.02),
            a_train_images=data.get("a_train_images", str, ""),
            a_train_labels=data.get("a_train_labels", str, ""),
            a_test_images=data.get("a_test_images", str, ""),
            a_test_labels=data.get("a_test_labels", str, ""),
            b_train_mat=data.get("b_train_mat", str, ""),
            b_test_mat=data.get("b_test_mat", str, ""),
        ),
        model=ModelConfig(
            conv_channels=model.get("conv_channels", lambda r: tuple(_parse_int_list(r)), (16, 32)),
            fc_dims=model.get("fc_dims", lambda r: tuple(_parse_int_list(r)), ()),
            tab_embed_dim=model.get("tab_embed_dim", int, 8),
            tab_feature_dim=model.get("tab_feature_dim", int, 32),
            expert_hidden=model.get("expert_hidden", int, 128),
            per_expert_fusion=model.get("per_expert_fusion", _parse_bool, False),
        ),
        optim=OptimConfig(
            epochs=optim.get("epochs", int, 10),
            batch_size=optim.get("batch_size", int, 128),
            lr=optim.get("lr", float, 1e-4),
            beta1=optim.get("beta1", float, 0.9),
            beta2=optim.get("beta2", float, 0.999),
            lam=optim.get("lam", float, 1.0),
        ),
        adapt=AdaptOptimConfig(
            epochs=adapt.get("epochs", int, 5),
            batch_size=adapt.get("batch_size", int, 128),
            lr=adapt.get("lr", float, 1e-2),
            beta1=adapt.get("beta1", float, 0.9),
            beta2=adapt.get("beta2", float, 0.999),
            stability_on_probs=adapt.get("stability_on_probs", _parse_bool, True),
        ),
        augment=AugmentConfig(
            crop_pad=augment.get("crop_pad", int, 3),
            flip_prob=augment.get("flip_prob", float, 0.0),
            brightness=augment.get("brightness", float, 0.2),
            contrast=augment.get("contrast", float, 0.2),
        ),
    )
    config.validate()
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    return loads_config(path.read_text(encoding="utf-8"))


def dumps_config(config: ExperimentConfig) -> str:
    out = io.StringIO()

    def section(name: str, pairs: list[tuple[str, object]]) -> None:
        out.write(f"[{name}]\n")
        for key, value in pairs:
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, tuple):
                value = ", ".join(str(v) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            out.write(f"{key} = {value}\n")
        out.write("\n")

    section(
        "experiment",
        [
            ("name", config.name),
            ("case", config.case),
            ("out", config.out),
            ("seeds", config.seeds),
            ("train_irs", tuple(repr(v) for v in config.train_irs)),
            ("test_specs", tuple(spec.format() for spec in config.test_specs)),
            ("variants", config.variants),
        ],
    )
    d = config.data
    section(
        "data",
        [
            ("family", d.family),
            ("num_classes", d.num_classes),
            ("head_train", d.head_train),
            ("head_test", d.head_test),
            ("source_seed", d.source_seed),
            ("noise_a", d.noise_a),
            ("noise_b", d.noise_b),
            ("corrupt_b", d.corrupt_b),
            ("clutter_b", d.clutter_b),
            ("image_size_a", d.image_size_a),
            ("image_size_b", d.image_size_b),
            ("train_frac", d.train_frac),
            ("missing_prob", d.missing_prob),
            ("a_train_images", d.a_train_images),
            ("a_train_labels", d.a_train_labels),
            ("a_test_images", d.a_test_images),
            ("a_test_labels", d.a_test_labels),
            ("b_train_mat", d.b_train_mat),
            ("b_test_mat", d.b_test_mat),
        ],
    )
    m = config.model
    section(
        "model",
        [
            ("conv_channels", m.conv_channels),
            ("fc_dims", m.fc_dims),
            ("tab_embed_dim", m.tab_embed_dim),
            ("tab_feature_dim", m.tab_feature_dim),
            ("expert_hidden", m.expert_hidden),
            ("per_expert_fusion", m.per_expert_fusion),
        ],
    )
    o = config.optim
    section(
        "optim",
        [
            ("epochs", o.epochs),
            ("batch_size", o.batch_size),
            ("lr", o.lr),
            ("beta1", o.beta1),
            ("beta2", o.beta2),
            ("lam", o.lam),
        ],
    )
    a = config.adapt
    section(
        "adapt",
        [
            ("epochs", a.epochs),
            ("batch_size", a.batch_size),
            ("lr", a.lr),
            ("beta1", a.beta1),
            ("beta2", a.beta2),
            ("stability_on_probs", a.stability_on_probs),
        ],
    )
    g = config.augment
    section(
        "augment",
        [
            ("crop_pad", g.crop_pad),
            ("flip_prob", g.flip_prob),
            ("brightness", g.brightness),
            ("contrast", g.contrast),
        ],
    )
    return out.getvalue()


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(dumps_config(config), encoding="utf-8", newline="\n")


def config_to_json(config: ExperimentConfig) -> str:
    payload = asdict(config)
    payload["test_specs"] = [spec.format() for spec in config.test_specs]
    return json.dumps(payload, indent=2, sort_keys=True)


def with_overrides(config: ExperimentConfig, seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    """Copy with CLI-level overrides applied."""
    from dataclasses import replace

    updated = config
    if seed is not None:
        updated = replace(updated, seeds=(seed,))
    if out is not None:
        updated = replace(updated, out=out)
    return updated
