"""
Padded multi-molecule batch.
"""

from dataclasses import dataclass
from typing import List

import numpy as np


@dataclass(frozen=True)
class Batch:
    """
    Padded input for q molecules.

    Attributes:
        molecule_ids: (q,) source row ids
        atom_features: (q, n_max, 5) category indices, zero in padding
        atom_degrees: (q, n_max) degree centrality, zero in padding
        atom_mask: (q, n_max) True for real atoms
        motif_ids: (q, m_max) model-side motif ids (vocabulary id + 1, 0 = UNK)
        motif_degrees: (q, m_max) junction-graph degree centrality
        motif_mask: (q, m_max) True for real motifs
        motif_keys: Canonical keys per molecule, unpadded
        labels: (q, c) targets, zero where missing
        label_mask: (q, c) True where a label is present
    """
    molecule_ids: np.ndarray
    atom_features: np.ndarray
    atom_degrees: np.ndarray
    atom_mask: np.ndarray
    motif_ids: np.ndarray
    motif_degrees: np.ndarray
    motif_mask: np.ndarray
    motif_keys: List[List[str]]
    labels: np.ndarray
    label_mask: np.ndarray

    def __post_init__(self) -> None:
        q = self.atom_mask.shape[0]
        if self.atom_mask.dtype != np.bool_ or self.motif_mask.dtype != np.bool_:
            raise ValueError("masks must be boolean")
        if self.label_mask.dtype != np.bool_:
            raise ValueError("label mask must be boolean")
        for name in ("atom_features", "atom_degrees", "motif_ids", "motif_degrees", "labels", "label_mask"):
            if getattr(self, name).shape[0] != q:
                raise ValueError(f"{name} has leading dimension != {q}")
        if not np.all(np.isfinite(self.labels[self.label_mask])):
            raise ValueError("present labels must be finite")

    @property
    def size(self) -> int:
        return int(self.atom_mask.shape[0])

    @property
    def num_tasks(self) -> int:
        return int(self.labels.shape[1])

    def motif_labels(self) -> np.ndarray:
        """Model-side motif ids of every real motif, flattened row-major."""
        return self.motif_ids[self.motif_mask]
