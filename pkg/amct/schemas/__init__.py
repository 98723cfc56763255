"""
Pydantic schemas for configuration, reports and artifact formats.
"""

from .checkpoint import CHECKPOINT_FORMAT, CheckpointHeader, TensorEntry
from .config import (
    Ablation,
    LossWeights,
    ModelConfig,
    PredictionSource,
    RunConfig,
    SweepGrid,
    TaskKind,
    TrainConfig,
)
from .report import (
    EpochLogRecord,
    EvalReport,
    ExplanationCsvRow,
    ExplanationReport,
    LossSummary,
    MetricKind,
    MoleculeExplanation,
    MotifAttribution,
    PropertyExplanation,
    RunManifest,
    SweepRow,
    VocabularyEntry,
    VocabularyFile,
)

__all__ = [
    "CHECKPOINT_FORMAT", "CheckpointHeader", "TensorEntry",
    "Ablation", "LossWeights", "ModelConfig", "PredictionSource", "RunConfig",
    "SweepGrid", "TaskKind", "TrainConfig",
    "EpochLogRecord", "EvalReport", "ExplanationCsvRow", "ExplanationReport",
    "LossSummary", "MetricKind", "MoleculeExplanation", "MotifAttribution",
    "PropertyExplanation", "RunManifest", "SweepRow", "VocabularyEntry",
    "VocabularyFile",
]
