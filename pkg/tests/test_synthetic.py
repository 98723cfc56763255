"""
Tests for the planted-motif benchmark and the random molecule generator.
"""

import numpy as np
import pytest

from amct.schemas.config import Ablation, ModelConfig, RunConfig, TaskKind, TrainConfig
from amct.services.dataset_service import DatasetService
from amct.services.decomposition import decompose
from amct.services.evaluation_service import evaluate
from amct.services.explanation_service import ExplanationService
from amct.services.smiles import parse_smiles, to_smiles
from amct.services.synthetic import (
    PLANTED_TASK,
    carries_planted_motif,
    fuzz_corpus,
    planted_benchmark,
    planted_motif_key,
    write_planted_benchmark,
)
from amct.services.training_service import run_training
from amct.services.vocabulary_service import vocabulary_from_motif_sets

from .helpers import same_molecule


class TestPlantedBenchmark:
    def test_planted_key_is_the_thiocarbonyl_bond(self):
        assert planted_motif_key() == decompose(parse_smiles("S=C")).motifs[0].canonical_key
        assert planted_motif_key() != decompose(parse_smiles("CS")).motifs[0].canonical_key

    def test_labels_mark_the_planted_motif(self):
        train, test = planted_benchmark(64, 32, seed=0)
        assert (len(train), len(test)) == (64, 32)
        for smiles, [label] in train + test:
            assert carries_planted_motif(smiles) == (label == 1.0), smiles

    def test_classes_alternate(self):
        train, _ = planted_benchmark(10, 0, seed=5)
        assert [labels[0] for _, labels in train] == [1.0, 0.0] * 5

    def test_deterministic(self):
        assert planted_benchmark(16, 8, seed=2) == planted_benchmark(16, 8, seed=2)
        assert planted_benchmark(16, 8, seed=2) != planted_benchmark(16, 8, seed=3)

    def test_written_files_load(self, tmp_path):
        paths = write_planted_benchmark(tmp_path, 12, 6, seed=1)
        train = DatasetService().load(paths["train"], TaskKind.CLASSIFICATION)
        test = DatasetService().load(paths["test"], TaskKind.CLASSIFICATION)
        assert (len(train), len(test)) == (12, 6)
        assert train.task_names == [PLANTED_TASK]
        expected, _ = planted_benchmark(12, 6, seed=1)
        assert [record.smiles for record in train] == [smiles for smiles, _ in expected]


class TestFuzzCorpus:
    def test_every_molecule_parses(self):
        for smiles in fuzz_corpus(300, seed=8):
            graph = parse_smiles(smiles)
            assert same_molecule(graph, parse_smiles(to_smiles(graph)))

    def test_deterministic(self):
        assert fuzz_corpus(50, seed=4) == fuzz_corpus(50, seed=4)

    def test_size_limit(self):
        assert all(parse_smiles(s).num_atoms <= 5 for s in fuzz_corpus(100, seed=6, max_atoms=5))


def planted_setup(seed=0):
    train_rows, test_rows = planted_benchmark(64, 32, seed=seed)
    service = DatasetService()
    train = service.from_rows(train_rows, [PLANTED_TASK], "planted-train")
    test = service.from_rows(test_rows, [PLANTED_TASK], "planted-test")
    vocabulary = vocabulary_from_motif_sets(record.motif_set for record in train)
    return train, test, vocabulary


def planted_config(seed=0, model=None):
    return RunConfig(model=model or ModelConfig(), train=TrainConfig(epochs=200, batch_size=16, seed=seed))


def held_out_auc(result, test, vocabulary, config):
    source = config.train.effective_prediction_source
    return evaluate(result.model, test, vocabulary, TaskKind.CLASSIFICATION, source).mean


@pytest.mark.slow
class TestPlantedTraining:
    def test_overfits_training_set(self):
        train, _, vocabulary = planted_setup()
        config = planted_config(model=ModelConfig(d_model=32, num_encoder_layers=2, num_decoder_layers=2))
        result = run_training(train, vocabulary, config, valid=train)
        assert evaluate(result.model, train, vocabulary, TaskKind.CLASSIFICATION).mean >= 0.99

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_generalizes_and_explains(self, seed):
        train, test, vocabulary = planted_setup()
        config = planted_config(seed)
        result = run_training(train, vocabulary, config, valid=test)
        assert held_out_auc(result, test, vocabulary, config) >= 0.95

        report = ExplanationService(result.model, vocabulary).explain_dataset(test, alpha=0.5)
        planted = planted_motif_key()
        positives = [m for m, record in zip(report.molecules, test) if record.labels[0] == 1.0]
        top_ranked = [m.properties[0].motifs[0].canonical_key == planted for m in positives]
        assert np.mean(top_ranked) >= 0.9

    def test_ablations_do_not_beat_full_model(self):
        train, test, vocabulary = planted_setup()
        full_config = planted_config()
        full = held_out_auc(run_training(train, vocabulary, full_config, valid=test), test, vocabulary, full_config)
        for ablation in (Ablation.NO_ALOSS, Ablation.NO_CLOSS, Ablation.NO_PAWARE):
            config = full_config.model_copy(update={"train": full_config.train.with_ablations([ablation])})
            ablated = held_out_auc(run_training(train, vocabulary, config, valid=test), test, vocabulary, config)
            assert full >= ablated - 0.02, ablation
