"""
Artifact checker: validates every file the CLI writes against its schema.
"""

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict

import structlog

from ..exceptions import ArtifactFormatError
from ..repositories.base import BaseRepository, PathLike
from ..repositories.checkpoint_repository import CheckpointRepository
from ..repositories.log_repository import TrainingLogRepository
from ..repositories.manifest_repository import ManifestRepository
from ..repositories.report_repository import EXPLANATION_COLUMNS, SWEEP_COLUMNS, ReportRepository
from ..repositories.vocabulary_repository import VocabularyRepository
from ..schemas.report import ExplanationCsvRow, ExplanationReport, SweepRow

logger = structlog.get_logger(__name__)


class ArtifactKind(str, enum.Enum):
    VOCAB = "vocab"
    LOG = "log"
    EXPLAIN = "explain"
    EXPLAIN_CSV = "explain-csv"
    SWEEP = "sweep"
    MANIFEST = "manifest"
    CHECKPOINT = "checkpoint"


@dataclass(frozen=True)
class CheckResult:
    kind: ArtifactKind
    path: Path
    items: int


def _vocab(path: PathLike) -> int:
    return len(VocabularyRepository().read(path).entries)


def _log(path: PathLike) -> int:
    records = TrainingLogRepository(path).read_all()
    last_epoch: Dict[int, int] = {}
    for record in records:
        if record.epoch <= last_epoch.get(record.run, 0):
            raise ArtifactFormatError(f"{path}: run {record.run} epochs are not increasing")
        last_epoch[record.run] = record.epoch
    return len(records)


def _explain(path: PathLike) -> int:
    return len(BaseRepository(ExplanationReport).read(path).molecules)


def _explain_csv(path: PathLike) -> int:
    return len(ReportRepository().read_rows(path, ExplanationCsvRow, EXPLANATION_COLUMNS))


def _sweep(path: PathLike) -> int:
    return len(ReportRepository().read_rows(path, SweepRow, SWEEP_COLUMNS))


def _manifest(path: PathLike) -> int:
    return len(ManifestRepository().read(path).outputs)


def _checkpoint(path: PathLike) -> int:
    return len(CheckpointRepository().read_header(path).tensors)


_CHECKERS: Dict[ArtifactKind, Callable[[PathLike], int]] = {
    ArtifactKind.VOCAB: _vocab,
    ArtifactKind.LOG: _log,
    ArtifactKind.EXPLAIN: _explain,
    ArtifactKind.EXPLAIN_CSV: _explain_csv,
    ArtifactKind.SWEEP: _sweep,
    ArtifactKind.MANIFEST: _manifest,
    ArtifactKind.CHECKPOINT: _checkpoint,
}


def check(kind: ArtifactKind, path: PathLike) -> CheckResult:
    """
    Validate one artifact.

    Args:
        kind: Artifact kind
        path: File to check

    Returns:
        CheckResult with the number of entries, records, rows or tensors found

    Raises:
        ArtifactFormatError: If the file is missing or does not match its schema
    """
    kind = ArtifactKind(kind)
    if not Path(path).is_file():
        raise ArtifactFormatError(f"{path} does not exist")
    items = _CHECKERS[kind](path)
    logger.info("artifact_checked", kind=kind.value, path=str(path), items=items)
    return CheckResult(kind=kind, path=Path(path), items=items)
