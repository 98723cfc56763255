"""
CSV report repository (sweep tables, explanation rows, motif embeddings).
"""

from pathlib import Path
from typing import List, Sequence, Type, TypeVar

import pandas as pd
from pydantic import BaseModel, ValidationError

from ..exceptions import ArtifactFormatError
from .base import PathLike

RowType = TypeVar("RowType", bound=BaseModel)

SWEEP_COLUMNS = ["lambda_a", "lambda_b", "metric_mean", "metric_std"]
EXPLANATION_COLUMNS = ["molecule_id", "property", "motif_id", "weight"]


class ReportRepository:
    """Writes row models as CSV with a fixed column order and reads them back validated."""

    def write_rows(self, path: PathLike, rows: Sequence[BaseModel], columns: List[str]) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame([row.model_dump() for row in rows], columns=columns)
        if "motif_id" in frame.columns:
            frame["motif_id"] = frame["motif_id"].astype("Int64")
        frame.to_csv(target, index=False, lineterminator="\n", float_format="%.17g")
        return target

    def write_frame(self, path: PathLike, frame: pd.DataFrame) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(target, index=False, lineterminator="\n", float_format="%.17g")
        return target

    def read_rows(self, path: PathLike, row_type: Type[RowType], columns: List[str]) -> List[RowType]:
        """
        Raises:
            ArtifactFormatError: If the header or any row is invalid
        """
        try:
            frame = pd.read_csv(path, keep_default_na=True)
        except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ArtifactFormatError(f"cannot read CSV {path}: {e}") from e
        if list(frame.columns) != columns:
            raise ArtifactFormatError(f"{path}: expected columns {columns}, got {list(frame.columns)}")
        text_fields = {name for name, field in row_type.model_fields.items() if field.annotation is str}
        rows = []
        for number, record in enumerate(frame.to_dict(orient="records"), start=2):
            cleaned = {key: (None if pd.isna(value) else value) for key, value in record.items()}
            for name in text_fields & cleaned.keys():
                if cleaned[name] is not None:
                    cleaned[name] = str(cleaned[name])
            try:
                rows.append(row_type.model_validate(cleaned))
            except ValidationError as e:
                raise ArtifactFormatError(f"{path} line {number}: {e}") from e
        return rows
