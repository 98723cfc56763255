"""
Motif tree decomposition and motif canonicalization.

Clusters are the junction-tree ones: every bridge bond is a two-atom bond
motif, every ring of a minimum cycle basis is a ring motif, and rings sharing
more than two atoms are merged into one bridged motif. Motifs sharing at least
one atom are joined by a junction edge.
"""

from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from ..models.molecule import MolecularGraph
from ..models.motif import Motif, MotifKind, MotifSet

BRIDGED_MERGE_THRESHOLD = 2

_BOND_CHARS = {1: "-", 2: "=", 3: "#", 4: ":"}

Certificate = Tuple[Tuple[str, ...], Tuple[Tuple[int, int, int], ...]]


def _smallest_rings(graph: MolecularGraph) -> List[FrozenSet[int]]:
    if not graph.ring_bonds:
        return []
    cycles = nx.minimum_cycle_basis(graph.nx_graph)
    return sorted((frozenset(cycle) for cycle in cycles), key=lambda ring: tuple(sorted(ring)))


def _merge_bridged(rings: Sequence[FrozenSet[int]]) -> List[Tuple[FrozenSet[int], bool]]:
    """Merge rings sharing more than BRIDGED_MERGE_THRESHOLD atoms until none do."""
    clusters = [(set(ring), False) for ring in rings]
    merged = True
    while merged:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                if len(clusters[i][0] & clusters[j][0]) > BRIDGED_MERGE_THRESHOLD:
                    clusters[i] = (clusters[i][0] | clusters[j][0], True)
                    del clusters[j]
                    merged = True
                    break
            if merged:
                break
    return [(frozenset(atoms), bridged) for atoms, bridged in clusters]


def decompose(graph: MolecularGraph) -> MotifSet:
    """
    Decompose a molecule into ring, bridged, and bond motifs.

    Args:
        graph: Valid connected molecular graph

    Returns:
        MotifSet: Motifs ordered by sorted atom tuple, plus junction edges
    """
    if graph.num_bonds == 0:
        atoms = frozenset({0})
        return MotifSet(motifs=(Motif(atoms, canonical_key(graph, atoms), MotifKind.SINGLETON),))

    clusters: List[Tuple[FrozenSet[int], MotifKind]] = []
    for atoms, bridged in _merge_bridged(_smallest_rings(graph)):
        clusters.append((atoms, MotifKind.BRIDGED if bridged else MotifKind.RING))
    ring_bonds = graph.ring_bonds
    for bond in graph.bonds:
        if bond.endpoints not in ring_bonds:
            clusters.append((frozenset(bond.endpoints), MotifKind.BOND))

    clusters.sort(key=lambda cluster: tuple(sorted(cluster[0])))
    motifs = tuple(Motif(atoms, canonical_key(graph, atoms), kind) for atoms, kind in clusters)

    edges = []
    for i in range(len(motifs)):
        for j in range(i + 1, len(motifs)):
            if motifs[i].atom_indices & motifs[j].atom_indices:
                edges.append((i, j))
    return MotifSet(motifs=motifs, junction_edges=tuple(edges))


def motif_degree_centrality(motif_set: MotifSet) -> np.ndarray:
    """
    Number of junction edges incident to each motif.

    Args:
        motif_set: Decomposition of one molecule

    Returns:
        (m,) int64 degrees
    """
    degrees = np.zeros(motif_set.num_motifs, dtype=np.int64)
    for i, j in motif_set.junction_edges:
        degrees[i] += 1
        degrees[j] += 1
    return degrees


def _dense_ranks(values: Sequence) -> List[int]:
    ranking = {value: rank for rank, value in enumerate(sorted(set(values)))}
    return [ranking[value] for value in values]


def _refine(colors: List[int], adjacency: List[List[Tuple[int, int]]]) -> List[int]:
    """1-WL refinement to a stable, order-preserving coloring."""
    while True:
        signatures = [
            (colors[v], tuple(sorted((code, colors[u]) for u, code in adjacency[v])))
            for v in range(len(colors))
        ]
        refined = _dense_ranks(signatures)
        if len(set(refined)) == len(set(colors)):
            return refined
        colors = refined


def _individualize(colors: List[int], vertex: int) -> List[int]:
    shifted = [2 * color + 1 for color in colors]
    shifted[vertex] = 2 * colors[vertex]
    return _dense_ranks(shifted)


def _certificate(
    colors: List[int],
    labels: List[str],
    adjacency: List[List[Tuple[int, int]]],
) -> Certificate:
    order = sorted(range(len(colors)), key=colors.__getitem__)
    position = {vertex: pos for pos, vertex in enumerate(order)}
    ordered_labels = tuple(labels[v] for v in order)
    edges = sorted(
        (min(position[v], position[u]), max(position[v], position[u]), code)
        for v in range(len(colors))
        for u, code in adjacency[v]
        if v < u
    )
    return ordered_labels, tuple(edges)


def _search(
    colors: List[int],
    labels: List[str],
    adjacency: List[List[Tuple[int, int]]],
) -> Certificate:
    """Minimal certificate over every individualization branch."""
    counts: Dict[int, int] = {}
    for color in colors:
        counts[color] = counts.get(color, 0) + 1
    ambiguous = [color for color, count in counts.items() if count > 1]
    if not ambiguous:
        return _certificate(colors, labels, adjacency)
    target = min(ambiguous)
    best = None
    for vertex in (v for v, color in enumerate(colors) if color == target):
        candidate = _search(_refine(_individualize(colors, vertex), adjacency), labels, adjacency)
        if best is None or candidate < best:
            best = candidate
    return best


def canonical_key(graph: MolecularGraph, atom_indices: Iterable[int]) -> str:
    """
    Relabeling-invariant key of the subgraph induced by `atom_indices`.

    Atom labels (element, charge, aromaticity) seed a 1-WL color refinement
    over bond-order-labelled edges; remaining ties are broken by
    individualization, and the lexicographically smallest resulting encoding
    is rendered as the key.

    Args:
        graph: Owning molecular graph
        atom_indices: Atoms of a connected induced subgraph

    Returns:
        str: Key such as "c.c.c.c.c.c|0:1,0:2,1:3,2:4,3:5,4:5"
    """
    nodes = sorted(set(atom_indices))
    local = {atom: i for i, atom in enumerate(nodes)}
    labels = [graph.atoms[atom].label for atom in nodes]
    adjacency: List[List[Tuple[int, int]]] = [[] for _ in nodes]
    for atom in nodes:
        for neighbor in graph.neighbors[atom]:
            if neighbor in local:
                code = graph.bond_between(atom, neighbor).order.code
                adjacency[local[atom]].append((local[neighbor], code))

    colors = _refine(_dense_ranks(labels), adjacency)
    ordered_labels, edges = _search(colors, labels, adjacency)
    bond_text = ",".join(f"{i}{_BOND_CHARS[code]}{j}" for i, j, code in edges)
    return ".".join(ordered_labels) + "|" + bond_text
