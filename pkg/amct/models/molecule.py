"""
Molecular graph entities: atoms, bonds, graphs and the atom feature schema.
"""

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Tuple

import networkx as nx

SUPPORTED_ELEMENTS: Tuple[str, ...] = ("B", "Br", "C", "Cl", "F", "I", "N", "O", "P", "S")
AROMATIC_ELEMENTS: FrozenSet[str] = frozenset({"B", "C", "N", "O", "P", "S"})


class BondOrder(str, enum.Enum):
    """Bond order enumeration."""
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"

    @property
    def symbol(self) -> str:
        """SMILES bond symbol."""
        return _BOND_SYMBOLS[self]

    @property
    def code(self) -> int:
        """Compact integer code used in canonical keys."""
        return _BOND_CODES[self]


_BOND_SYMBOLS = {
    BondOrder.SINGLE: "-",
    BondOrder.DOUBLE: "=",
    BondOrder.TRIPLE: "#",
    BondOrder.AROMATIC: ":",
}
_BOND_CODES = {
    BondOrder.SINGLE: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 4,
}


@dataclass(frozen=True)
class Atom:
    """
    Heavy atom; hydrogens are implicit and never become nodes.

    Attributes:
        element: Element symbol from SUPPORTED_ELEMENTS
        formal_charge: Integer charge in [-2, 2]
        aromatic: Written as an aromatic (lowercase) atom
        degree: Number of heavy-atom neighbours
    """
    element: str
    formal_charge: int = 0
    aromatic: bool = False
    degree: int = 0

    def __post_init__(self) -> None:
        if self.element not in SUPPORTED_ELEMENTS:
            raise ValueError(f"unsupported element {self.element!r}")
        if not -2 <= self.formal_charge <= 2:
            raise ValueError(f"formal charge {self.formal_charge} outside [-2, 2]")
        if self.degree < 0:
            raise ValueError("degree must be non-negative")

    @property
    def label(self) -> str:
        """Element/charge/aromaticity label used by canonicalization."""
        symbol = self.element.lower() if self.aromatic else self.element
        if self.formal_charge:
            return f"{symbol}{self.formal_charge:+d}"
        return symbol


@dataclass(frozen=True)
class Bond:
    """
    Undirected bond between two distinct atoms.

    Attributes:
        begin: Lower atom index
        end: Higher atom index
        order: Bond order
    """
    begin: int
    end: int
    order: BondOrder = BondOrder.SINGLE

    def __post_init__(self) -> None:
        if self.begin == self.end:
            raise ValueError("bond endpoints must be distinct")
        if self.begin > self.end:
            first, second = self.end, self.begin
            object.__setattr__(self, "begin", first)
            object.__setattr__(self, "end", second)

    @property
    def endpoints(self) -> Tuple[int, int]:
        return (self.begin, self.end)

    def other(self, atom: int) -> int:
        """Endpoint opposite to `atom`."""
        return self.end if atom == self.begin else self.begin


@dataclass(frozen=True)
class MolecularGraph:
    """
    Parsed, connected molecular graph.

    Attributes:
        atoms: Atoms in parse order
        bonds: Bonds, no duplicates between the same pair
        source_text: SMILES string the graph came from
    """
    atoms: Tuple[Atom, ...]
    bonds: Tuple[Bond, ...]
    source_text: str = ""

    def __post_init__(self) -> None:
        n = len(self.atoms)
        if n == 0:
            raise ValueError("a molecular graph needs at least one atom")
        seen = set()
        degrees = [0] * n
        for bond in self.bonds:
            if not (0 <= bond.begin < n and 0 <= bond.end < n):
                raise ValueError(f"bond {bond.endpoints} out of range")
            if bond.endpoints in seen:
                raise ValueError(f"duplicate bond {bond.endpoints}")
            seen.add(bond.endpoints)
            degrees[bond.begin] += 1
            degrees[bond.end] += 1
        for index, atom in enumerate(self.atoms):
            if atom.degree != degrees[index]:
                raise ValueError(f"atom {index} degree {atom.degree} != {degrees[index]} incident bonds")

    def __repr__(self) -> str:
        return f"<MolecularGraph(atoms={len(self.atoms)}, bonds={len(self.bonds)}, smiles='{self.source_text}')>"

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)

    @cached_property
    def neighbors(self) -> Tuple[Tuple[int, ...], ...]:
        """Neighbour indices per atom, in bond order."""
        adjacency: List[List[int]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            adjacency[bond.begin].append(bond.end)
            adjacency[bond.end].append(bond.begin)
        return tuple(tuple(row) for row in adjacency)

    @cached_property
    def bond_index(self) -> Dict[Tuple[int, int], Bond]:
        """Bond lookup by sorted endpoint pair."""
        return {bond.endpoints: bond for bond in self.bonds}

    def bond_between(self, i: int, j: int) -> Optional[Bond]:
        """The bond joining i and j, if any."""
        return self.bond_index.get((min(i, j), max(i, j)))

    @cached_property
    def nx_graph(self) -> nx.Graph:
        """networkx view with `label` node and `order` edge attributes."""
        graph = nx.Graph()
        for index, atom in enumerate(self.atoms):
            graph.add_node(index, label=atom.label)
        for bond in self.bonds:
            graph.add_edge(bond.begin, bond.end, order=bond.order.code)
        return graph

    @cached_property
    def ring_bonds(self) -> FrozenSet[Tuple[int, int]]:
        """Endpoint pairs of bonds lying on at least one cycle (non-bridges)."""
        bridges = {(min(u, v), max(u, v)) for u, v in nx.bridges(self.nx_graph)}
        return frozenset(bond.endpoints for bond in self.bonds if bond.endpoints not in bridges)

    @cached_property
    def ring_atoms(self) -> FrozenSet[int]:
        """Atoms incident to at least one ring bond."""
        return frozenset(atom for pair in self.ring_bonds for atom in pair)

    def to_dict(self) -> dict:
        """Convert graph to dictionary representation."""
        return {
            "smiles": self.source_text,
            "atoms": [
                {
                    "element": atom.element,
                    "formal_charge": atom.formal_charge,
                    "aromatic": atom.aromatic,
                    "degree": atom.degree,
                }
                for atom in self.atoms
            ],
            "bonds": [
                {"endpoints": list(bond.endpoints), "order": bond.order.value}
                for bond in self.bonds
            ],
        }


@dataclass(frozen=True)
class AtomFeatureSchema:
    """
    Fixed categorical atom featurization.

    Category orderings:
        element: B, Br, C, Cl, F, I, N, O, P, S (alphabetical)
        degree: 0..max_degree
        formal_charge: -2, -1, 0, 1, 2
        aromatic: false, true
        ring_membership: false, true
    """
    elements: Tuple[str, ...] = SUPPORTED_ELEMENTS
    max_degree: int = 6
    charges: Tuple[int, ...] = (-2, -1, 0, 1, 2)
    element_index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "element_index", {e: i for i, e in enumerate(self.elements)})

    @property
    def category_names(self) -> Tuple[str, ...]:
        return ("element", "degree", "formal_charge", "aromatic", "ring_membership")

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return (len(self.elements), self.max_degree + 1, len(self.charges), 2, 2)


DEFAULT_SCHEMA = AtomFeatureSchema()
