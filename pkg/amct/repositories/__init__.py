"""
Repository layer for artifact access abstraction.
"""

from .base import BaseRepository
from .checkpoint_repository import CheckpointRepository
from .dataset_repository import DatasetRepository, DatasetRow, DatasetTable
from .log_repository import TrainingLogRepository
from .manifest_repository import ManifestRepository, manifest_path_for
from .report_repository import EXPLANATION_COLUMNS, SWEEP_COLUMNS, ReportRepository
from .vocabulary_repository import VocabularyRepository

__all__ = [
    "BaseRepository",
    "CheckpointRepository",
    "DatasetRepository",
    "DatasetRow",
    "DatasetTable",
    "TrainingLogRepository",
    "ManifestRepository",
    "manifest_path_for",
    "EXPLANATION_COLUMNS",
    "SWEEP_COLUMNS",
    "ReportRepository",
    "VocabularyRepository",
]
