"""
SMILES subset parser and deterministic writer.

Supported grammar: organic-subset atoms (B C N O P S F Cl Br I and aromatic
b c n o p s), bracket atoms with optional H count and charge in [-2, 2], bond
symbols - = # :, branches, ring-closure digits and %nn labels. Stereochemistry,
isotopes, atom classes and multi-fragment '.' input are rejected. Hydrogens are
implicit and never become atoms.
"""

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import structlog

from ..exceptions import (
    Disconnected,
    InvalidSmiles,
    TooManyAtoms,
    UnclosedBranch,
    UnclosedRing,
    UnsupportedToken,
)
from ..models.molecule import AROMATIC_ELEMENTS, Atom, Bond, BondOrder, MolecularGraph

logger = structlog.get_logger(__name__)

_BOND_SYMBOLS: Dict[str, BondOrder] = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
}
_ALIPHATIC = {"B", "C", "N", "O", "P", "S", "F", "I"}
_AROMATIC = {"b", "c", "n", "o", "p", "s"}
_TWO_LETTER = {"Br", "Cl"}
_STEREO = {"/", "\\", "@"}

_BRACKET_ATOM = re.compile(
    r"^(?P<isotope>\d+)?"
    r"(?P<symbol>Br|Cl|B|C|N|O|P|S|F|I|b|c|n|o|p|s)"
    r"(?P<chiral>@+)?"
    r"(?P<hcount>H\d?)?"
    r"(?P<charge>\+\+|--|[+-]\d?)?"
    r"(?P<atom_class>:\d+)?$"
)


@dataclass(frozen=True)
class ParseLimits:
    """Limits applied while parsing."""
    max_atoms: int = 128


@dataclass
class _PendingAtom:
    element: str
    charge: int
    aromatic: bool


def _parse_charge(text: Optional[str]) -> int:
    if not text:
        return 0
    if text == "++":
        return 2
    if text == "--":
        return -2
    sign = 1 if text[0] == "+" else -1
    return sign * (int(text[1:]) if len(text) > 1 else 1)


class _SmilesParser:
    """Single-use left-to-right parser over one SMILES string."""

    def __init__(self, text: str, limits: ParseLimits):
        self.text = text
        self.limits = limits
        self.atoms: List[_PendingAtom] = []
        self.bonds: Dict[Tuple[int, int], BondOrder] = {}
        self.prev: Optional[int] = None
        self.pending_bond: Optional[Tuple[str, int]] = None
        self.branches: List[Tuple[int, int]] = []
        self.rings: Dict[int, Tuple[int, Optional[str], int]] = {}

    def parse(self) -> MolecularGraph:
        text = self.text
        i = 0
        while i < len(text):
            ch = text[i]
            if ch == "(":
                self._open_branch(i)
                i += 1
            elif ch == ")":
                self._close_branch(i)
                i += 1
            elif ch in _BOND_SYMBOLS:
                self._set_bond(ch, i)
                i += 1
            elif ch.isdigit():
                self._ring_label(int(ch), i)
                i += 1
            elif ch == "%":
                digits = text[i + 1:i + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise UnsupportedToken(text[i:i + 3], i, "'%' must be followed by two digits")
                self._ring_label(int(digits), i)
                i += 3
            elif ch == "[":
                i = self._bracket_atom(i)
            elif ch == ".":
                raise Disconnected("multi-fragment SMILES ('.') is not supported", i)
            elif ch in _STEREO:
                raise UnsupportedToken(ch, i, "stereochemistry is not supported")
            elif text[i:i + 2] in _TWO_LETTER:
                self._add_atom(text[i:i + 2], 0, False, i)
                i += 2
            elif ch in _ALIPHATIC:
                self._add_atom(ch, 0, False, i)
                i += 1
            elif ch in _AROMATIC:
                self._add_atom(ch.upper(), 0, True, i)
                i += 1
            else:
                raise UnsupportedToken(ch, i)
        return self._finish()

    def _open_branch(self, offset: int) -> None:
        if self.prev is None:
            raise UnsupportedToken("(", offset, "branch without a preceding atom")
        if self.pending_bond is not None:
            raise UnsupportedToken(self.pending_bond[0], self.pending_bond[1], "bond symbol before '('")
        if self.text[offset + 1:offset + 2] == ")":
            raise UnsupportedToken("()", offset, "empty branch")
        self.branches.append((self.prev, offset))

    def _close_branch(self, offset: int) -> None:
        if not self.branches:
            raise UnsupportedToken(")", offset, "unmatched ')'")
        if self.pending_bond is not None:
            raise UnsupportedToken(self.pending_bond[0], self.pending_bond[1], "dangling bond")
        self.prev = self.branches.pop()[0]

    def _set_bond(self, symbol: str, offset: int) -> None:
        if self.prev is None:
            raise UnsupportedToken(symbol, offset, "bond without a preceding atom")
        if self.pending_bond is not None:
            raise UnsupportedToken(symbol, offset, "consecutive bond symbols")
        self.pending_bond = (symbol, offset)

    def _default_order(self, a: int, b: int) -> BondOrder:
        if self.atoms[a].aromatic and self.atoms[b].aromatic:
            return BondOrder.AROMATIC
        return BondOrder.SINGLE

    def _add_bond(self, a: int, b: int, symbol: Optional[str], offset: int) -> None:
        key = (min(a, b), max(a, b))
        if key in self.bonds:
            raise UnsupportedToken(self.text[offset], offset, "duplicate bond")
        self.bonds[key] = _BOND_SYMBOLS[symbol] if symbol else self._default_order(a, b)

    def _ring_label(self, label: int, offset: int) -> None:
        if self.prev is None:
            raise UnsupportedToken(self.text[offset], offset, "ring closure without a preceding atom")
        symbol = self.pending_bond[0] if self.pending_bond else None
        self.pending_bond = None
        if label not in self.rings:
            self.rings[label] = (self.prev, symbol, offset)
            return
        partner, open_symbol, _ = self.rings.pop(label)
        if partner == self.prev:
            raise UnsupportedToken(self.text[offset], offset, "ring closure onto the same atom")
        if open_symbol and symbol and open_symbol != symbol:
            raise UnsupportedToken(symbol, offset, "conflicting ring-closure bond symbols")
        self._add_bond(partner, self.prev, symbol or open_symbol, offset)

    def _bracket_atom(self, offset: int) -> int:
        end = self.text.find("]", offset)
        if end < 0:
            raise UnsupportedToken("[", offset, "unterminated bracket atom")
        content = self.text[offset + 1:end]
        match = _BRACKET_ATOM.match(content)
        if match is None:
            raise UnsupportedToken(f"[{content}]", offset)
        if match.group("isotope"):
            raise UnsupportedToken(f"[{content}]", offset, "isotopes are not supported")
        if match.group("chiral"):
            raise UnsupportedToken(f"[{content}]", offset, "stereochemistry is not supported")
        if match.group("atom_class"):
            raise UnsupportedToken(f"[{content}]", offset, "atom classes are not supported")
        charge = _parse_charge(match.group("charge"))
        if not -2 <= charge <= 2:
            raise UnsupportedToken(f"[{content}]", offset, "formal charge outside [-2, 2]")
        symbol = match.group("symbol")
        aromatic = symbol in _AROMATIC
        self._add_atom(symbol.upper() if aromatic else symbol, charge, aromatic, offset)
        return end + 1

    def _add_atom(self, element: str, charge: int, aromatic: bool, offset: int) -> None:
        if len(self.atoms) >= self.limits.max_atoms:
            raise TooManyAtoms(f"molecule exceeds max_atoms={self.limits.max_atoms}", offset)
        self.atoms.append(_PendingAtom(element, charge, aromatic))
        index = len(self.atoms) - 1
        if self.prev is not None:
            symbol = self.pending_bond[0] if self.pending_bond else None
            self._add_bond(self.prev, index, symbol, offset)
        self.pending_bond = None
        self.prev = index

    def _finish(self) -> MolecularGraph:
        if self.pending_bond is not None:
            raise UnsupportedToken(self.pending_bond[0], self.pending_bond[1], "dangling bond")
        if self.branches:
            raise UnclosedBranch("unclosed branch '('", self.branches[-1][1])
        if self.rings:
            label, (_, _, offset) = min(self.rings.items(), key=lambda item: item[1][2])
            raise UnclosedRing(f"ring closure {label} never closed", offset)
        if not self.atoms:
            raise InvalidSmiles("SMILES contains no atoms")

        degrees = [0] * len(self.atoms)
        for a, b in self.bonds:
            degrees[a] += 1
            degrees[b] += 1
        atoms = tuple(
            Atom(element=p.element, formal_charge=p.charge, aromatic=p.aromatic, degree=degrees[i])
            for i, p in enumerate(self.atoms)
        )
        bonds = tuple(Bond(a, b, order) for (a, b), order in self.bonds.items())
        return MolecularGraph(atoms=atoms, bonds=bonds, source_text=self.text)


def parse_smiles(text: str, limits: Optional[ParseLimits] = None) -> MolecularGraph:
    """
    Parse a SMILES string into a connected molecular graph.

    Args:
        text: Non-empty ASCII SMILES
        limits: Parse limits (defaults to max_atoms=128)

    Returns:
        MolecularGraph: Atoms in parse order, bonds in creation order

    Raises:
        InvalidSmiles: Empty or non-ASCII input
        UnsupportedToken: Token outside the supported subset (names token and offset)
        UnclosedRing: Dangling ring-closure label
        UnclosedBranch: Unmatched '('
        Disconnected: Multi-fragment input
        TooManyAtoms: More than limits.max_atoms atoms
    """
    if not text:
        raise InvalidSmiles("SMILES text is empty")
    if not text.isascii():
        raise InvalidSmiles("SMILES text must be ASCII")
    return _SmilesParser(text, limits or ParseLimits()).parse()


def _atom_token(atom: Atom) -> str:
    if atom.aromatic and atom.element not in AROMATIC_ELEMENTS:
        raise ValueError(f"element {atom.element} cannot be written as aromatic")
    symbol = atom.element.lower() if atom.aromatic else atom.element
    if atom.formal_charge == 0:
        return symbol
    sign = "+" if atom.formal_charge > 0 else "-"
    magnitude = abs(atom.formal_charge)
    return f"[{symbol}{sign}{magnitude if magnitude > 1 else ''}]"


def _bond_token(graph: MolecularGraph, bond: Bond) -> str:
    both_aromatic = graph.atoms[bond.begin].aromatic and graph.atoms[bond.end].aromatic
    implied = BondOrder.AROMATIC if both_aromatic else BondOrder.SINGLE
    return "" if bond.order == implied else bond.order.symbol


def _ring_token(label: int) -> str:
    return str(label) if label < 10 else f"%{label:02d}"


def to_smiles(graph: MolecularGraph) -> str:
    """
    Deterministic depth-first SMILES for a graph.

    Traversal starts at atom 0 and visits neighbours in ascending index order;
    ring-closure labels reuse the lowest free number. Re-parsing the output
    yields a graph isomorphic to the input.

    Args:
        graph: Molecular graph

    Returns:
        str: SMILES text
    """
    n = graph.num_atoms
    visited = [False] * n
    parent: List[Optional[int]] = [None] * n
    children: List[List[int]] = [[] for _ in range(n)]
    ring_edges: List[Tuple[int, int]] = []
    seen_ring_edges = set()

    def visit(atom: int) -> None:
        visited[atom] = True
        for neighbor in sorted(graph.neighbors[atom]):
            if not visited[neighbor]:
                parent[neighbor] = atom
                children[atom].append(neighbor)
                visit(neighbor)
            elif neighbor != parent[atom]:
                key = (min(atom, neighbor), max(atom, neighbor))
                if key not in seen_ring_edges:
                    seen_ring_edges.add(key)
                    # neighbor was visited first, so the ring opens there
                    ring_edges.append((neighbor, atom))

    visit(0)

    opens: Dict[int, List[int]] = {}
    closes: Dict[int, List[int]] = {}
    for edge_index, (opener, closer) in enumerate(ring_edges):
        opens.setdefault(opener, []).append(edge_index)
        closes.setdefault(closer, []).append(edge_index)

    labels: Dict[int, int] = {}
    in_use: set = set()
    parts: List[str] = []

    def emit(atom: int) -> None:
        parts.append(_atom_token(graph.atoms[atom]))
        released = []
        for edge_index in closes.get(atom, []):
            opener, closer = ring_edges[edge_index]
            bond = graph.bond_between(opener, closer)
            parts.append(_bond_token(graph, bond) + _ring_token(labels[edge_index]))
            released.append(labels[edge_index])
        for edge_index in opens.get(atom, []):
            label = 1
            while label in in_use or label in released:
                label += 1
            labels[edge_index] = label
            in_use.add(label)
            parts.append(_ring_token(label))
        in_use.difference_update(released)
        for position, child in enumerate(children[atom]):
            bond_text = _bond_token(graph, graph.bond_between(atom, child))
            last = position == len(children[atom]) - 1
            if not last:
                parts.append("(")
            parts.append(bond_text)
            emit(child)
            if not last:
                parts.append(")")

    emit(0)
    return "".join(parts)
