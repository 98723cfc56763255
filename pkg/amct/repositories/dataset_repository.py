"""
Dataset repository for `smiles,<task1>,...,<taskc>` CSV files.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from ..exceptions import DatasetFormatError
from ..utils.hashing import sha256_file
from ..utils.validators import parse_label
from .base import PathLike

SMILES_COLUMN = "smiles"


@dataclass(frozen=True)
class DatasetRow:
    """
    One raw data row.

    Attributes:
        row_index: Zero-based data row number (becomes the molecule id)
        line: One-based line number in the file
        smiles: SMILES cell text
        labels: (c,) float labels, NaN where the cell was empty
    """
    row_index: int
    line: int
    smiles: str
    labels: np.ndarray


@dataclass(frozen=True)
class DatasetTable:
    task_names: List[str]
    rows: List[DatasetRow]
    source_hash: str


class DatasetRepository:
    """
    Repository reading molecule CSV files with pandas.

    UTF-8, LF or CRLF line endings. An empty cell is a missing label. A file
    with no bytes yields an empty table.
    """

    def read(self, path: PathLike) -> DatasetTable:
        """
        Read a dataset CSV.

        Args:
            path: CSV file

        Returns:
            DatasetTable: Task names, rows, and the SHA-256 of the file bytes

        Raises:
            DatasetFormatError: On a bad header or unparsable label cell
        """
        path = Path(path)
        try:
            source_hash = sha256_file(path)
        except OSError as e:
            raise DatasetFormatError(f"cannot read dataset {path}: {e}") from e
        if path.stat().st_size == 0:
            return DatasetTable(task_names=[], rows=[], source_hash=source_hash)

        try:
            frame = pd.read_csv(
                path,
                dtype=str,
                index_col=False,
                keep_default_na=False,
                skip_blank_lines=False,
                encoding="utf-8",
            )
        except (pd.errors.ParserError, UnicodeDecodeError) as e:
            raise DatasetFormatError(f"{path}: {e}") from e
        except pd.errors.EmptyDataError:
            return DatasetTable(task_names=[], rows=[], source_hash=source_hash)

        columns = [str(column).strip() for column in frame.columns]
        if not columns or columns[0] != SMILES_COLUMN:
            raise DatasetFormatError(f"first column must be '{SMILES_COLUMN}', got {columns[:1]}", line=1)
        task_names = columns[1:]
        if len(set(task_names)) != len(task_names):
            raise DatasetFormatError("duplicate task column names", line=1)

        frame = frame.fillna("")
        rows: List[DatasetRow] = []
        for position, values in enumerate(frame.itertuples(index=False, name=None)):
            line = position + 2
            cells = [str(value).strip() for value in values]
            if not any(cells):
                continue
            labels = np.full(len(task_names), np.nan)
            for task, cell in enumerate(cells[1:]):
                value, error = parse_label(cell)
                if error:
                    raise DatasetFormatError(f"column {task_names[task]!r}: {error}", line=line)
                if value is not None:
                    labels[task] = value
            rows.append(DatasetRow(row_index=len(rows), line=line, smiles=cells[0], labels=labels))
        return DatasetTable(task_names=task_names, rows=rows, source_hash=source_hash)
