"""
Content hashing and seed derivation.
"""

import hashlib
from pathlib import Path
from typing import Union

_CHUNK = 1 << 20


def sha256_bytes(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def sha256_file(path: Union[str, Path]) -> str:
    """Hex SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(_CHUNK), b""):
            digest.update(chunk)
    return digest.hexdigest()


def derive_seed(base_seed: int, *coordinates: object) -> int:
    """
    Deterministic 32-bit seed from a base seed and labelled coordinates.

    The result depends only on the values passed, never on call order, so
    sweep cells and repeated runs get stable seeds.
    """
    text = "|".join([str(base_seed)] + [repr(c) for c in coordinates])
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:4], "little")
