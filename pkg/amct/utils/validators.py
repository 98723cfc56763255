"""
Validation utilities for dataset values.
"""

import math
from typing import Optional, Sequence, Tuple


def validate_smiles_text(text: str) -> Tuple[bool, str]:
    """
    Check the surface form of a SMILES cell before parsing.

    Args:
        text: Raw cell text

    Returns:
        Tuple[bool, str]: (is_valid, error_message)
    """
    if not text:
        return False, "SMILES is required"

    if not text.isascii():
        return False, "SMILES must be ASCII"

    if any(ch.isspace() for ch in text):
        return False, "SMILES must not contain whitespace"

    return True, ""


def parse_label(cell: str) -> Tuple[Optional[float], str]:
    """
    Parse one label cell; an empty cell is a missing label.

    Returns:
        Tuple[Optional[float], str]: (value or None, error_message)
    """
    cell = cell.strip()
    if not cell:
        return None, ""
    try:
        value = float(cell)
    except ValueError:
        return None, f"label {cell!r} is not a number"
    if not math.isfinite(value):
        return None, f"label {cell!r} is not finite"
    return value, ""


def validate_classification_labels(values: Sequence[float]) -> Tuple[bool, str]:
    """
    Classification labels must be 0 or 1 (NaN marks a missing label).

    Returns:
        Tuple[bool, str]: (is_valid, error_message)
    """
    for value in values:
        if math.isnan(value):
            continue
        if value not in (0.0, 1.0):
            return False, f"classification label {value} is not 0 or 1"
    return True, ""
