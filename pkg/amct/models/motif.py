"""
Motif entities: motifs of one molecule and the corpus motif vocabulary.
"""

import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

UNK_ID = 0
VOCABULARY_VERSION = "amct-vocab/1"


class MotifKind(str, enum.Enum):
    """Motif kind enumeration."""
    RING = "ring"
    BOND = "bond"
    BRIDGED = "bridged"
    SINGLETON = "singleton"


@dataclass(frozen=True)
class Motif:
    """
    Connected atom cluster produced by tree decomposition.

    Attributes:
        atom_indices: Indices into the owning MolecularGraph
        canonical_key: Relabeling-invariant form of the induced subgraph
        kind: Ring, bond, bridged ring system, or singleton atom
    """
    atom_indices: FrozenSet[int]
    canonical_key: str
    kind: MotifKind

    def __post_init__(self) -> None:
        if not self.atom_indices:
            raise ValueError("a motif needs at least one atom")

    def __repr__(self) -> str:
        return f"<Motif(kind='{self.kind.value}', atoms={sorted(self.atom_indices)})>"

    @property
    def sorted_atoms(self) -> Tuple[int, ...]:
        return tuple(sorted(self.atom_indices))


@dataclass(frozen=True)
class MotifSet:
    """
    Motifs of one molecule and the junction edges between them.

    Attributes:
        motifs: Motifs ordered by their sorted atom tuples
        junction_edges: Pairs (i, j), i < j, of motifs sharing at least one atom
    """
    motifs: Tuple[Motif, ...]
    junction_edges: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        m = len(self.motifs)
        for i, j in self.junction_edges:
            if not (0 <= i < j < m):
                raise ValueError(f"junction edge {(i, j)} is not an ordered in-range pair")
        if len(set(self.junction_edges)) != len(self.junction_edges):
            raise ValueError("duplicate junction edges")

    @property
    def num_motifs(self) -> int:
        return len(self.motifs)

    @property
    def keys(self) -> List[str]:
        return [motif.canonical_key for motif in self.motifs]

    def covered_atoms(self) -> FrozenSet[int]:
        """Union of all motif atom sets."""
        covered: set = set()
        for motif in self.motifs:
            covered |= motif.atom_indices
        return frozenset(covered)


@dataclass
class MotifVocabulary:
    """
    Corpus-level motif dictionary.

    Vocabulary ids are dense and 0-based in first-seen order. Model-side motif
    ids shift them up by one so that id 0 is the reserved UNK motif.

    Attributes:
        entries: canonical key -> vocabulary id
        counts: canonical key -> occurrences over the corpus
        version: Format version tag
    """
    entries: Dict[str, int] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)
    version: str = VOCABULARY_VERSION

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return key in self.entries

    def insert(self, key: str, count: int = 1) -> int:
        """Add `count` occurrences of `key`, assigning the next id on first sight."""
        if key not in self.entries:
            self.entries[key] = len(self.entries)
            self.counts[key] = 0
        self.counts[key] += count
        return self.entries[key]

    def lookup(self, key: str) -> Optional[int]:
        """Vocabulary id of `key`, or None if unseen."""
        return self.entries.get(key)

    def model_id(self, key: str) -> int:
        """Embedding-table row for `key`: vocabulary id + 1, or UNK_ID."""
        vocab_id = self.entries.get(key)
        return UNK_ID if vocab_id is None else vocab_id + 1

    def model_ids(self, keys: Iterable[str]) -> List[int]:
        return [self.model_id(key) for key in keys]

    def ordered_keys(self) -> List[str]:
        """Keys sorted by id."""
        return sorted(self.entries, key=self.entries.__getitem__)

    def top_k(self, k: int) -> List[Tuple[str, int]]:
        """The k most frequent keys; ties broken by id."""
        ranked = sorted(self.entries, key=lambda key: (-self.counts[key], self.entries[key]))
        return [(key, self.counts[key]) for key in ranked[:k]]

    def content_hash(self) -> str:
        """SHA-256 over version and keys in id order; counts do not affect it."""
        payload = json.dumps({"version": self.version, "keys": self.ordered_keys()})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()
