"""
Padding molecules into batches.
"""

from typing import Iterator, Optional, Sequence

import numpy as np

from ..exceptions import EmptyDataset
from ..models.batch import Batch
from ..models.dataset import MoleculeDataset, MoleculeRecord
from ..models.motif import MotifVocabulary


def collate(records: Sequence[MoleculeRecord], vocabulary: MotifVocabulary) -> Batch:
    """
    Pad a list of records to the largest atom and motif counts among them.

    Unseen motif keys map to the UNK id.
    """
    if not records:
        raise EmptyDataset("cannot collate an empty list of molecules")
    q = len(records)
    n_max = max(record.num_atoms for record in records)
    m_max = max(record.num_motifs for record in records)
    num_tasks = records[0].labels.shape[0]

    atom_features = np.zeros((q, n_max, records[0].atom_features.shape[1]), dtype=np.int64)
    atom_degrees = np.zeros((q, n_max), dtype=np.int64)
    atom_mask = np.zeros((q, n_max), dtype=bool)
    motif_ids = np.zeros((q, m_max), dtype=np.int64)
    motif_degrees = np.zeros((q, m_max), dtype=np.int64)
    motif_mask = np.zeros((q, m_max), dtype=bool)
    labels = np.zeros((q, num_tasks))
    label_mask = np.zeros((q, num_tasks), dtype=bool)

    for row, record in enumerate(records):
        n, m = record.num_atoms, record.num_motifs
        atom_features[row, :n] = record.atom_features
        atom_degrees[row, :n] = record.atom_degrees
        atom_mask[row, :n] = True
        motif_ids[row, :m] = vocabulary.model_ids(record.motif_set.keys)
        motif_degrees[row, :m] = record.motif_degrees
        motif_mask[row, :m] = True
        present = ~np.isnan(record.labels)
        labels[row, present] = record.labels[present]
        label_mask[row] = present

    return Batch(
        molecule_ids=np.asarray([record.molecule_id for record in records], dtype=np.int64),
        atom_features=atom_features,
        atom_degrees=atom_degrees,
        atom_mask=atom_mask,
        motif_ids=motif_ids,
        motif_degrees=motif_degrees,
        motif_mask=motif_mask,
        motif_keys=[record.motif_set.keys for record in records],
        labels=labels,
        label_mask=label_mask,
    )


def batch_order(size: int, seed: Optional[int]) -> np.ndarray:
    """Molecule order for one pass: identity without a seed, else a seeded permutation."""
    if seed is None:
        return np.arange(size)
    return np.random.default_rng(seed).permutation(size)


def make_batches(
    dataset: MoleculeDataset,
    vocabulary: MotifVocabulary,
    batch_size: int,
    seed: Optional[int] = None,
) -> Iterator[Batch]:
    """
    Yield padded batches of `batch_size` molecules (the last may be smaller).

    Args:
        dataset: Preprocessed molecules
        vocabulary: Motif vocabulary for id lookup
        batch_size: Molecules per batch, q >= 1
        seed: Shuffle seed; None keeps dataset order

    Raises:
        EmptyDataset: If the dataset has no molecules
    """
    if len(dataset) == 0:
        raise EmptyDataset(f"dataset '{dataset.name}' has no molecules")
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    order = batch_order(len(dataset), seed)
    for start in range(0, len(order), batch_size):
        yield collate([dataset[int(i)] for i in order[start:start + batch_size]], vocabulary)
