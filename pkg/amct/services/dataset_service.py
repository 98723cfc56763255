"""
Dataset service: CSV rows to featurized, decomposed molecule records, and
seeded train/valid/test splits.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from ..exceptions import DatasetFormatError, InputError
from ..models.dataset import MoleculeDataset, MoleculeRecord
from ..models.molecule import DEFAULT_SCHEMA, AtomFeatureSchema
from ..repositories.dataset_repository import DatasetRepository
from ..schemas.config import TaskKind, TrainConfig
from ..utils.validators import validate_classification_labels, validate_smiles_text
from .decomposition import decompose, motif_degree_centrality
from .featurizer import atom_feature_matrix, degree_centrality
from .smiles import ParseLimits, parse_smiles

logger = structlog.get_logger(__name__)


def featurize_molecule(
    molecule_id: int,
    smiles: str,
    labels: Sequence[float],
    limits: Optional[ParseLimits] = None,
    schema: AtomFeatureSchema = DEFAULT_SCHEMA,
) -> MoleculeRecord:
    """
    Parse, decompose and featurize one molecule.

    Raises:
        SmilesError: If the SMILES text is rejected
        SchemaOverflow: If an atom does not fit the feature schema
    """
    graph = parse_smiles(smiles, limits)
    motif_set = decompose(graph)
    return MoleculeRecord(
        molecule_id=molecule_id,
        graph=graph,
        motif_set=motif_set,
        atom_features=atom_feature_matrix(graph, schema),
        atom_degrees=degree_centrality(graph),
        motif_degrees=motif_degree_centrality(motif_set),
        labels=np.asarray(labels, dtype=np.float64),
    )


class DatasetService:
    """
    Service for loading molecule datasets.
    """

    def __init__(
        self,
        limits: Optional[ParseLimits] = None,
        schema: AtomFeatureSchema = DEFAULT_SCHEMA,
        repository: Optional[DatasetRepository] = None,
    ):
        self.limits = limits or ParseLimits()
        self.schema = schema
        self.repository = repository or DatasetRepository()

    def load(self, path: Union[str, Path], task: Optional[TaskKind] = None) -> MoleculeDataset:
        """
        Read and preprocess a dataset CSV.

        Args:
            path: CSV file
            task: If classification, labels must be 0 or 1

        Returns:
            MoleculeDataset: One record per non-blank row, ids in row order

        Raises:
            DatasetFormatError: With the offending line number
        """
        table = self.repository.read(path)
        records = []
        for row in table.rows:
            valid, error = validate_smiles_text(row.smiles)
            if not valid:
                raise DatasetFormatError(error, line=row.line)
            if task == TaskKind.CLASSIFICATION:
                valid, error = validate_classification_labels(row.labels)
                if not valid:
                    raise DatasetFormatError(error, line=row.line)
            try:
                records.append(featurize_molecule(row.row_index, row.smiles, row.labels, self.limits, self.schema))
            except InputError as e:
                raise DatasetFormatError(e.message, line=row.line) from e
        logger.info("dataset_loaded", path=str(path), molecules=len(records), tasks=len(table.task_names))
        return MoleculeDataset(
            records=records,
            task_names=table.task_names,
            source_hash=table.source_hash,
            name=Path(path).stem,
        )

    def from_rows(
        self,
        rows: Iterable[Tuple[str, Sequence[float]]],
        task_names: List[str],
        name: str = "dataset",
    ) -> MoleculeDataset:
        """Build a dataset from in-memory (smiles, labels) pairs."""
        records = [
            featurize_molecule(index, smiles, labels, self.limits, self.schema)
            for index, (smiles, labels) in enumerate(rows)
        ]
        return MoleculeDataset(records=records, task_names=list(task_names), name=name)


@dataclass(frozen=True)
class DatasetSplits:
    train: MoleculeDataset
    valid: MoleculeDataset
    test: MoleculeDataset

    def by_name(self, name: str) -> MoleculeDataset:
        return {"train": self.train, "valid": self.valid, "test": self.test}[name]


def split_dataset(dataset: MoleculeDataset, config: TrainConfig, seed: Optional[int] = None) -> DatasetSplits:
    """
    Seeded random split by molecule into train/valid/test.

    Sizes are floor(fraction * n) for valid and test; train gets
    floor(train_fraction * n) but at least one molecule when the dataset is
    non-empty.
    """
    seed = config.seed if seed is None else seed
    total = len(dataset)
    order = np.random.default_rng(seed).permutation(total)
    valid_size = int(np.floor(config.valid_fraction * total))
    test_size = int(np.floor(config.test_fraction * total))
    train_size = max(int(np.floor(config.train_fraction * total)), 1 if total else 0)
    train_size = min(train_size, total)
    valid_size = min(valid_size, total - train_size)
    test_size = min(test_size, total - train_size - valid_size)
    train_idx = order[:train_size].tolist()
    valid_idx = order[train_size:train_size + valid_size].tolist()
    test_idx = order[train_size + valid_size:train_size + valid_size + test_size].tolist()
    return DatasetSplits(
        train=dataset.subset(train_idx, f"{dataset.name}-train"),
        valid=dataset.subset(valid_idx, f"{dataset.name}-valid"),
        test=dataset.subset(test_idx, f"{dataset.name}-test"),
    )
