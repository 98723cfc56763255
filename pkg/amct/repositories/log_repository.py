"""
Training log repository (JSON lines, one EpochLogRecord per epoch).
"""

import json
from pathlib import Path
from typing import List

from pydantic import ValidationError

from ..exceptions import ArtifactFormatError
from ..schemas.report import EpochLogRecord
from .base import PathLike


class TrainingLogRepository:
    """Append-only JSON-lines writer bound to one file."""

    def __init__(self, path: PathLike):
        self.path = Path(path)

    def reset(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text("", encoding="utf-8")

    def append(self, record: EpochLogRecord) -> None:
        with open(self.path, "a", encoding="utf-8", newline="\n") as handle:
            handle.write(record.model_dump_json() + "\n")

    def read_all(self) -> List[EpochLogRecord]:
        """
        Raises:
            ArtifactFormatError: On a line that is not a valid record
        """
        records = []
        try:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise ArtifactFormatError(f"cannot read log {self.path}: {e}") from e
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                records.append(EpochLogRecord.model_validate(json.loads(line)))
            except (json.JSONDecodeError, ValidationError) as e:
                raise ArtifactFormatError(f"{self.path} line {number}: {e}") from e
        return records
