"""
Shared test helpers: graph relabeling and brute-force oracles.
"""

from itertools import combinations
from typing import Dict, FrozenSet, List, Sequence, Set, Tuple

import networkx as nx
import numpy as np

from amct.models.molecule import Bond, MolecularGraph
from amct.models.motif import MotifKind


def permute_graph(graph: MolecularGraph, order: Sequence[int]) -> MolecularGraph:
    """Graph whose atom k is `graph.atoms[order[k]]`."""
    position = {old: new for new, old in enumerate(order)}
    atoms = tuple(graph.atoms[old] for old in order)
    bonds = tuple(Bond(position[b.begin], position[b.end], b.order) for b in graph.bonds)
    return MolecularGraph(atoms=atoms, bonds=bonds, source_text=graph.source_text)


def same_molecule(first: MolecularGraph, second: MolecularGraph) -> bool:
    return nx.is_isomorphic(
        first.nx_graph,
        second.nx_graph,
        node_match=lambda a, b: a["label"] == b["label"],
        edge_match=lambda a, b: a["order"] == b["order"],
    )


def induced(graph: MolecularGraph, atoms) -> nx.Graph:
    return graph.nx_graph.subgraph(sorted(atoms)).copy()


def same_subgraph(first: nx.Graph, second: nx.Graph) -> bool:
    return nx.is_isomorphic(
        first,
        second,
        node_match=lambda a, b: a["label"] == b["label"],
        edge_match=lambda a, b: a["order"] == b["order"],
    )


def all_cycles(graph: MolecularGraph) -> List[FrozenSet[Tuple[int, int]]]:
    """Every simple cycle as a set of edges, by exhaustive path search."""
    neighbors = graph.neighbors
    found: Set[FrozenSet[Tuple[int, int]]] = set()

    def extend(start: int, path: List[int]) -> None:
        for nxt in neighbors[path[-1]]:
            if nxt == start and len(path) >= 3:
                edges = frozenset(
                    (min(a, b), max(a, b)) for a, b in zip(path, path[1:] + [start])
                )
                found.add(edges)
            elif nxt > start and nxt not in path:
                extend(start, path + [nxt])

    for start in range(graph.num_atoms):
        extend(start, [start])
    return sorted(found, key=lambda edges: (len(edges), sorted(edges)))


def oracle_decomposition(graph: MolecularGraph) -> Set[Tuple[FrozenSet[int], MotifKind]]:
    """
    Motif atom sets by the decomposition rules, from exhaustive ring search:
    a greedy minimum cycle basis over GF(2), rings sharing more than two
    atoms merged, remaining bonds as two-atom motifs.
    """
    if graph.num_bonds == 0:
        return {(frozenset({0}), MotifKind.SINGLETON)}
    edge_bit: Dict[Tuple[int, int], int] = {b.endpoints: 1 << i for i, b in enumerate(graph.bonds)}
    cycles = all_cycles(graph)

    basis_vectors: List[int] = []
    rings: List[FrozenSet[int]] = []
    for cycle in cycles:
        vector = 0
        for edge in cycle:
            vector |= edge_bit[edge]
        reduced = vector
        for pivot in basis_vectors:
            reduced = min(reduced, reduced ^ pivot)
        if reduced:
            basis_vectors.append(reduced)
            basis_vectors.sort(reverse=True)
            rings.append(frozenset(atom for edge in cycle for atom in edge))

    clusters = [(set(ring), MotifKind.RING) for ring in rings]
    merged = True
    while merged:
        merged = False
        for i, j in combinations(range(len(clusters)), 2):
            if len(clusters[i][0] & clusters[j][0]) > 2:
                clusters[i] = (clusters[i][0] | clusters[j][0], MotifKind.BRIDGED)
                del clusters[j]
                merged = True
                break

    cycle_edges = {edge for cycle in cycles for edge in cycle}
    result = {(frozenset(atoms), kind) for atoms, kind in clusters}
    for bond in graph.bonds:
        if bond.endpoints not in cycle_edges:
            result.add((frozenset(bond.endpoints), MotifKind.BOND))
    return result


def pairwise_auc(labels: np.ndarray, scores: np.ndarray) -> float:
    """AUC by counting every positive/negative pair; ties count one half."""
    positives = scores[labels == 1]
    negatives = scores[labels == 0]
    wins = 0.0
    for p in positives:
        for n in negatives:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(positives) * len(negatives))


def brute_force_contrastive(rows: np.ndarray, labels: np.ndarray, unknown_label: int = 0) -> float:
    total = 0.0
    anchors = 0
    for i in range(len(rows)):
        if labels[i] == unknown_label:
            continue
        scores = [float(rows[i] @ rows[k]) for k in range(len(rows))]
        positive = sum(np.exp(s) for k, s in enumerate(scores) if labels[k] == labels[i])
        everything = sum(np.exp(s) for s in scores)
        total += np.log(positive) - np.log(everything)
        anchors += 1
    return -total / anchors if anchors else 0.0
