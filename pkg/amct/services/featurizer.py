"""
Atom featurization and degree-centrality structure encoding.
"""

from typing import List, Tuple

import numpy as np

from ..exceptions import SchemaOverflow
from ..models.molecule import DEFAULT_SCHEMA, AtomFeatureSchema, MolecularGraph


def atom_feature_indices(
    graph: MolecularGraph,
    schema: AtomFeatureSchema = DEFAULT_SCHEMA,
) -> List[Tuple[int, int, int, int, int]]:
    """
    Encode every atom as (element, degree, formal_charge, aromatic, ring_membership).

    Args:
        graph: Molecular graph
        schema: Feature schema fixing the category orderings

    Returns:
        List of per-atom index tuples in atom order

    Raises:
        SchemaOverflow: If an attribute has no slot in the schema
    """
    ring_atoms = graph.ring_atoms
    features = []
    for index, atom in enumerate(graph.atoms):
        element = schema.element_index.get(atom.element)
        if element is None:
            raise SchemaOverflow(f"atom {index}: element {atom.element} not in schema")
        if atom.degree > schema.max_degree:
            raise SchemaOverflow(f"atom {index}: degree {atom.degree} exceeds {schema.max_degree}")
        if atom.formal_charge not in schema.charges:
            raise SchemaOverflow(f"atom {index}: charge {atom.formal_charge} not in schema")
        features.append((
            element,
            atom.degree,
            schema.charges.index(atom.formal_charge),
            int(atom.aromatic),
            int(index in ring_atoms),
        ))
    return features


def atom_feature_matrix(graph: MolecularGraph, schema: AtomFeatureSchema = DEFAULT_SCHEMA) -> np.ndarray:
    """(n, 5) int64 array of atom_feature_indices."""
    return np.asarray(atom_feature_indices(graph, schema), dtype=np.int64).reshape(graph.num_atoms, 5)


def degree_centrality(graph: MolecularGraph) -> np.ndarray:
    """
    Number of incident bonds per atom.

    Args:
        graph: Molecular graph

    Returns:
        (n,) int64 degrees; their sum is twice the bond count
    """
    degrees = np.zeros(graph.num_atoms, dtype=np.int64)
    for bond in graph.bonds:
        degrees[bond.begin] += 1
        degrees[bond.end] += 1
    return degrees
