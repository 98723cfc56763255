"""
Synthetic molecule generators: the planted-motif benchmark and a random
molecule fuzzer.
"""

from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import structlog

from ..models.molecule import Atom, Bond, BondOrder, MolecularGraph
from .decomposition import decompose
from .smiles import parse_smiles, to_smiles

logger = structlog.get_logger(__name__)

PLANTED_TASK = "planted"
PLANTED_FRAGMENT = "C(=S)"

# Chain pieces joined left to right; none carries a C=S bond. "S" and "C(=O)"
# are decoys that share atoms or bond order with the planted motif.
BACKBONE_FRAGMENTS: Tuple[str, ...] = (
    "C",
    "CC",
    "CCC",
    "C(C)",
    "C(C)C",
    "O",
    "N",
    "S",
    "C(=O)",
    "C=C",
    "C(F)",
    "C(Cl)",
    "c1ccccc1",
    "c1ccncc1",
    "C1CCCCC1",
    "C1CCNCC1",
    "C1CCOC1",
)

FUZZ_ELEMENTS: Tuple[str, ...] = ("C", "C", "C", "C", "N", "O", "S", "F", "Cl", "Br", "P")
MAX_FUZZ_DEGREE = 4

Row = Tuple[str, List[float]]


def planted_motif_key() -> str:
    """Canonical key of the thiocarbonyl C=S bond motif."""
    return decompose(parse_smiles("C=S")).motifs[0].canonical_key


def carries_planted_motif(smiles: str) -> bool:
    return planted_motif_key() in decompose(parse_smiles(smiles)).keys


def _planted_smiles(rng: np.random.Generator, positive: bool) -> str:
    count = int(rng.integers(2, 5))
    pieces = [BACKBONE_FRAGMENTS[int(i)] for i in rng.integers(0, len(BACKBONE_FRAGMENTS), size=count)]
    if positive:
        pieces.insert(int(rng.integers(0, count + 1)), PLANTED_FRAGMENT)
    return "".join(pieces)


def planted_rows(count: int, rng: np.random.Generator) -> List[Row]:
    """
    Alternating positive/negative molecules, starting with a positive.

    A positive is a random chain of backbone fragments with the planted
    C(=S) fragment inserted at a random position; a negative is the chain alone.
    """
    rows = []
    for index in range(count):
        positive = index % 2 == 0
        rows.append((_planted_smiles(rng, positive), [1.0 if positive else 0.0]))
    return rows


def planted_benchmark(
    num_train: int = 64,
    num_test: int = 32,
    seed: int = 0,
) -> Tuple[List[Row], List[Row]]:
    """
    Deterministic planted-motif train/test rows; label 1 iff the molecule
    carries a C=S bond motif.
    """
    rng = np.random.default_rng(seed)
    train = planted_rows(num_train, rng)
    test = planted_rows(num_test, rng)
    return train, test


def rows_to_frame(rows: Sequence[Row], task_names: Sequence[str] = (PLANTED_TASK,)) -> pd.DataFrame:
    frame = pd.DataFrame({"smiles": [smiles for smiles, _ in rows]})
    for column, name in enumerate(task_names):
        frame[name] = [labels[column] for _, labels in rows]
    return frame


def write_planted_benchmark(
    out_dir: Union[str, Path],
    num_train: int = 64,
    num_test: int = 32,
    seed: int = 0,
) -> Dict[str, Path]:
    """
    Write train.csv and test.csv for the planted-motif benchmark.

    Returns:
        Mapping of split name to written path
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train, test = planted_benchmark(num_train, num_test, seed)
    paths = {}
    for name, rows in (("train", train), ("test", test)):
        path = out / f"{name}.csv"
        rows_to_frame(rows).to_csv(path, index=False, lineterminator="\n", float_format="%.0f")
        paths[name] = path
    logger.info("synthetic_written", out=str(out), train=len(train), test=len(test), seed=seed)
    return paths


def random_molecule(rng: np.random.Generator, max_atoms: int = 12, ring_closures: int = 2) -> MolecularGraph:
    """
    Random connected molecule: a random spanning tree over 1..max_atoms
    atoms plus up to `ring_closures` extra single bonds, with no atom above
    degree 4. Some tree bonds become double; a few atoms carry +1/-1 charge.
    """
    n = int(rng.integers(1, max_atoms + 1))
    elements = [FUZZ_ELEMENTS[int(i)] for i in rng.integers(0, len(FUZZ_ELEMENTS), size=n)]
    degrees = [0] * n
    bonds: Dict[Tuple[int, int], BondOrder] = {}

    for atom in range(1, n):
        candidates = [j for j in range(atom) if degrees[j] < MAX_FUZZ_DEGREE]
        parent = candidates[int(rng.integers(0, len(candidates)))]
        order = BondOrder.DOUBLE if rng.random() < 0.15 else BondOrder.SINGLE
        bonds[(parent, atom)] = order
        degrees[parent] += 1
        degrees[atom] += 1

    for _ in range(ring_closures):
        if n < 3:
            break
        i, j = sorted(int(k) for k in rng.choice(n, size=2, replace=False))
        if (i, j) in bonds or degrees[i] >= MAX_FUZZ_DEGREE or degrees[j] >= MAX_FUZZ_DEGREE:
            continue
        bonds[(i, j)] = BondOrder.SINGLE
        degrees[i] += 1
        degrees[j] += 1

    charges = [int(rng.choice((-1, 1))) if rng.random() < 0.05 else 0 for _ in range(n)]
    atoms = tuple(
        Atom(element=elements[i], formal_charge=charges[i], degree=degrees[i]) for i in range(n)
    )
    return MolecularGraph(atoms=atoms, bonds=tuple(Bond(a, b, order) for (a, b), order in bonds.items()))


def random_smiles(rng: np.random.Generator, max_atoms: int = 12, ring_closures: int = 2) -> str:
    return to_smiles(random_molecule(rng, max_atoms, ring_closures))


def fuzz_corpus(count: int, seed: int = 0, max_atoms: int = 12) -> List[str]:
    """`count` random valid SMILES strings from one seed."""
    rng = np.random.default_rng(seed)
    return [random_smiles(rng, max_atoms) for _ in range(count)]

