from ltmx.data.types import (
    BACKWARD,
    FORWARD,
    IMAGE,
    TABULAR,
    UNIFORM,
    ClassDistribution,
    DistributionSpec,
    LabeledSource,
    PairedDataset,
    PairedSample,
)
from ltmx.data.pipeline import (
    class_priors,
    longtail_counts,
    pair_modalities,
    stratified_split,
    subsample_longtailed,
)
from ltmx.data.augment import IDENTITY, AugmentConfig, augment_dataset_views, augment_image, stochastic_augment
from ltmx.data.manifest import Manifest, ManifestRecord, materialize, read_manifest, write_manifest
from ltmx.data.tabular import CategoricalField, NumericField, TabularSchema, encode_records, encode_tabular

__all__ = [
    "AugmentConfig",
    "BACKWARD",
    "CategoricalField",
    "ClassDistribution",
    "DistributionSpec",
    "FORWARD",
    "IDENTITY",
    "IMAGE",
    "LabeledSource",
    "Manifest",
    "ManifestRecord",
    "NumericField",
    "PairedDataset",
    "PairedSample",
    "TABULAR",
    "TabularSchema",
    "UNIFORM",
    "augment_dataset_views",
    "augment_image",
    "class_priors",
    "encode_records",
    "encode_tabular",
    "longtail_counts",
    "materialize",
    "pair_modalities",
    "read_manifest",
    "stochastic_augment",
    "stratified_split",
    "subsample_longtailed",
    "write_manifest",
]
