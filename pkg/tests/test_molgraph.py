"""
Tests for SMILES ingestion, atom featurization and degree centrality.
"""

import numpy as np
import pytest

from amct.exceptions import (
    Disconnected,
    InvalidSmiles,
    SchemaOverflow,
    TooManyAtoms,
    UnclosedBranch,
    UnclosedRing,
    UnsupportedToken,
)
from amct.models.molecule import Atom, AtomFeatureSchema, BondOrder, MolecularGraph
from amct.services.featurizer import atom_feature_indices, atom_feature_matrix, degree_centrality
from amct.services.smiles import ParseLimits, parse_smiles, to_smiles
from amct.services.synthetic import fuzz_corpus, random_molecule

from .helpers import permute_graph, same_molecule


class TestParse:
    def test_cyclohexanol(self):
        graph = parse_smiles("C1CCCCC1O")
        assert graph.num_atoms == 7
        assert graph.num_bonds == 7
        assert [atom.element for atom in graph.atoms] == ["C"] * 6 + ["O"]
        assert graph.source_text == "C1CCCCC1O"

    def test_single_atom(self):
        graph = parse_smiles("C")
        assert graph.num_atoms == 1
        assert graph.num_bonds == 0

    def test_benzene_is_aromatic(self):
        graph = parse_smiles("c1ccccc1")
        assert all(atom.aromatic for atom in graph.atoms)
        assert {bond.order for bond in graph.bonds} == {BondOrder.AROMATIC}
        assert all(atom.degree == 2 for atom in graph.atoms)

    def test_explicit_bond_orders(self):
        graph = parse_smiles("C=CC#N")
        orders = [graph.bond_between(0, 1).order, graph.bond_between(1, 2).order, graph.bond_between(2, 3).order]
        assert orders == [BondOrder.DOUBLE, BondOrder.SINGLE, BondOrder.TRIPLE]

    def test_bracket_atoms_carry_charge(self):
        graph = parse_smiles("C[N+](C)(C)C")
        assert graph.atoms[1].formal_charge == 1
        assert graph.atoms[1].degree == 4
        assert parse_smiles("[O-]C").atoms[0].formal_charge == -1
        assert parse_smiles("[S--]").atoms[0].formal_charge == -2

    def test_hydrogen_counts_do_not_add_atoms(self):
        assert parse_smiles("[NH4+]").num_atoms == 1

    def test_percent_ring_labels(self):
        assert parse_smiles("C%10CCCC%10").num_bonds == 5

    def test_ring_closure_bond_symbol(self):
        graph = parse_smiles("C=1CCCC1")
        assert graph.bond_between(0, 4).order == BondOrder.DOUBLE

    @pytest.mark.parametrize(
        "text, error",
        [
            ("", InvalidSmiles),
            ("C1CC", UnclosedRing),
            ("C(C", UnclosedBranch),
            ("C.C", Disconnected),
            ("C@C", UnsupportedToken),
            ("C/C=C/C", UnsupportedToken),
            ("[C@@H](C)O", UnsupportedToken),
            ("[13C]", UnsupportedToken),
            ("CX", UnsupportedToken),
            ("C=", UnsupportedToken),
            ("C)", UnsupportedToken),
            ("C11", UnsupportedToken),
        ],
    )
    def test_rejections(self, text, error):
        with pytest.raises(error):
            parse_smiles(text)

    def test_unsupported_token_names_offset(self):
        with pytest.raises(UnsupportedToken) as info:
            parse_smiles("CC@C")
        assert info.value.offset == 2
        assert "'@'" in info.value.message

    def test_too_many_atoms(self):
        parse_smiles("CCC", ParseLimits(max_atoms=3))
        with pytest.raises(TooManyAtoms):
            parse_smiles("CCCC", ParseLimits(max_atoms=3))

    def test_rejected_input_is_an_input_error(self):
        with pytest.raises(UnclosedRing) as info:
            parse_smiles("C1CC")
        assert info.value.exit_code == 2


class TestGraphInvariants:
    def test_degree_must_match_bonds(self):
        with pytest.raises(ValueError):
            MolecularGraph(atoms=(Atom("C", degree=1),), bonds=())

    def test_ring_membership(self):
        graph = parse_smiles("C1CCCCC1O")
        assert graph.ring_atoms == frozenset(range(6))
        assert (5, 6) not in graph.ring_bonds


class TestFeatures:
    def test_methane(self):
        assert atom_feature_indices(parse_smiles("C")) == [(2, 0, 2, 0, 0)]

    def test_benzene(self):
        features = atom_feature_matrix(parse_smiles("c1ccccc1"))
        assert features.shape == (6, 5)
        np.testing.assert_array_equal(features, np.tile([2, 2, 2, 1, 1], (6, 1)))

    def test_charge_and_ring_columns(self):
        features = atom_feature_matrix(parse_smiles("C1CC1[O-]"))
        np.testing.assert_array_equal(features[:, 4], [1, 1, 1, 0])
        assert features[3, 0] == 7
        assert features[3, 2] == 1

    def test_schema_overflow(self):
        schema = AtomFeatureSchema(max_degree=2)
        with pytest.raises(SchemaOverflow):
            atom_feature_indices(parse_smiles("CC(C)C"), schema)

    def test_narrow_charge_schema(self):
        schema = AtomFeatureSchema(charges=(0,))
        with pytest.raises(SchemaOverflow):
            atom_feature_indices(parse_smiles("[O-]C"), schema)


class TestDegreeCentrality:
    @pytest.mark.parametrize(
        "smiles, expected",
        [
            ("C1CCCCC1O", [2, 2, 2, 2, 2, 3, 1]),
            ("CCO", [1, 2, 1]),
            ("C", [0]),
        ],
    )
    def test_examples(self, smiles, expected):
        np.testing.assert_array_equal(degree_centrality(parse_smiles(smiles)), expected)

    def test_handshake(self):
        for smiles in fuzz_corpus(200, seed=3):
            graph = parse_smiles(smiles)
            assert int(degree_centrality(graph).sum()) == 2 * graph.num_bonds


class TestRoundTrip:
    @pytest.mark.parametrize(
        "smiles",
        [
            "C",
            "C1CCCCC1O",
            "c1ccc2ccccc2c1",
            "CC(=O)Oc1ccccc1C(=O)O",
            "c1ccc(cc1)-c1ccccc1",
            "C12C3C4C1C5C2C3C45",
            "C[N+](C)(C)C",
            "CC#N",
        ],
    )
    def test_curated(self, smiles):
        graph = parse_smiles(smiles)
        assert same_molecule(parse_smiles(to_smiles(graph)), graph)

    def test_fuzz_corpus(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            graph = random_molecule(rng)
            assert same_molecule(parse_smiles(to_smiles(graph)), graph)

    def test_writer_is_deterministic(self):
        graph = parse_smiles("CC(=O)Oc1ccccc1C(=O)O")
        assert to_smiles(graph) == to_smiles(graph)

    def test_start_atom_permutation(self):
        assert same_molecule(parse_smiles("C1CCCCC1O"), parse_smiles("OC1CCCCC1"))
        rng = np.random.default_rng(5)
        graph = parse_smiles("CC(=O)Oc1ccccc1C(=O)O")
        for _ in range(20):
            permuted = permute_graph(graph, rng.permutation(graph.num_atoms))
            assert same_molecule(parse_smiles(to_smiles(permuted)), graph)
