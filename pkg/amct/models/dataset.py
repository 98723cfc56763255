"""
Preprocessed molecule records and datasets.
"""

from dataclasses import dataclass, field
from typing import Iterator, List, Sequence

import numpy as np

from .molecule import MolecularGraph
from .motif import MotifSet


@dataclass(frozen=True)
class MoleculeRecord:
    """
    One dataset row, parsed, decomposed and featurized once.

    Attributes:
        molecule_id: Zero-based row number in the source CSV
        graph: Parsed molecular graph
        motif_set: Tree decomposition of the graph
        atom_features: (n, 5) category indices
        atom_degrees: (n,) degree centrality
        motif_degrees: (m,) junction-graph degree centrality
        labels: (c,) targets; NaN marks a missing label
    """
    molecule_id: int
    graph: MolecularGraph
    motif_set: MotifSet
    atom_features: np.ndarray
    atom_degrees: np.ndarray
    motif_degrees: np.ndarray
    labels: np.ndarray

    @property
    def smiles(self) -> str:
        return self.graph.source_text

    @property
    def num_atoms(self) -> int:
        return self.graph.num_atoms

    @property
    def num_motifs(self) -> int:
        return self.motif_set.num_motifs


@dataclass
class MoleculeDataset:
    """
    Ordered collection of records sharing task names.

    Attributes:
        records: Molecule records
        task_names: Label column names
        source_hash: SHA-256 of the source CSV bytes
    """
    records: List[MoleculeRecord]
    task_names: List[str]
    source_hash: str = ""
    name: str = field(default="dataset")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[MoleculeRecord]:
        return iter(self.records)

    def __getitem__(self, index: int) -> MoleculeRecord:
        return self.records[index]

    @property
    def num_tasks(self) -> int:
        return len(self.task_names)

    def subset(self, indices: Sequence[int], name: str) -> "MoleculeDataset":
        """Dataset restricted to `indices`, in the given order."""
        return MoleculeDataset(
            records=[self.records[i] for i in indices],
            task_names=list(self.task_names),
            source_hash=self.source_hash,
            name=name,
        )

    def label_matrix(self) -> np.ndarray:
        """(len, c) labels with NaN for missing entries."""
        if not self.records:
            return np.zeros((0, self.num_tasks))
        return np.stack([record.labels for record in self.records])
