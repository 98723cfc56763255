"""
Utility functions for the toolkit.
"""

from .hashing import derive_seed, sha256_bytes, sha256_file
from .validators import parse_label, validate_classification_labels, validate_smiles_text

__all__ = [
    "derive_seed",
    "sha256_bytes",
    "sha256_file",
    "parse_label",
    "validate_classification_labels",
    "validate_smiles_text",
]
