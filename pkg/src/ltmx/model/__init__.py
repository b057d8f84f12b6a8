from ltmx.model.encoders import (
    ImageEncoder,
    ImageModalityConfig,
    ModalityConfig,
    TabularEncoder,
    TabularModalityConfig,
)
from ltmx.model.heads import (
    NUM_EXPERTS,
    ArchConfig,
    ClassifierModule,
    ConfidenceOutputs,
    ExpertBundle,
    ExpertHead,
    ModalityHeads,
    fuse,
)
from ltmx.model.training import (
    TRACE_COLUMNS,
    TraceRow,
    TrainConfig,
    TrainState,
    to_tensors,
    train_experts,
)
from ltmx.model.checkpoint import FORMAT_TAG, file_sha256, load_checkpoint, save_checkpoint

__all__ = [
    "ArchConfig",
    "ClassifierModule",
    "ConfidenceOutputs",
    "ExpertBundle",
    "ExpertHead",
    "FORMAT_TAG",
    "ImageEncoder",
    "ImageModalityConfig",
    "ModalityConfig",
    "ModalityHeads",
    "NUM_EXPERTS",
    "TRACE_COLUMNS",
    "TabularEncoder",
    "TabularModalityConfig",
    "TraceRow",
    "TrainConfig",
    "TrainState",
    "file_sha256",
    "fuse",
    "load_checkpoint",
    "save_checkpoint",
    "to_tensors",
    "train_experts",
]
