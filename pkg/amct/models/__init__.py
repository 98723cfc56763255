"""
Domain entities: molecules, motifs, vocabularies, datasets and batches.
"""

from .batch import Batch
from .dataset import MoleculeDataset, MoleculeRecord
from .molecule import DEFAULT_SCHEMA, Atom, AtomFeatureSchema, Bond, BondOrder, MolecularGraph
from .motif import UNK_ID, Motif, MotifKind, MotifSet, MotifVocabulary

__all__ = [
    "Batch", "MoleculeDataset", "MoleculeRecord",
    "DEFAULT_SCHEMA", "Atom", "AtomFeatureSchema", "Bond", "BondOrder", "MolecularGraph",
    "UNK_ID", "Motif", "MotifKind", "MotifSet", "MotifVocabulary",
]
