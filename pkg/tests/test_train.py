"""
Tests for batching, optimization, repeated runs and the loss-weight sweep.
"""

import numpy as np
import pytest

from amct.autograd import Tensor, ops
from amct.exceptions import ConfigError, DivergedLoss, EmptyDataset, NoLabels
from amct.models.dataset import MoleculeDataset
from amct.models.motif import MotifVocabulary
from amct.network.amct_model import AmctModel
from amct.network.optim import Adam, clip_grad_norm
from amct.repositories.log_repository import TrainingLogRepository
from amct.schemas.config import Ablation, ModelConfig, PredictionSource, RunConfig, SweepGrid, TaskKind, TrainConfig
from amct.services import training_service
from amct.services.batching import make_batches
from amct.services.dataset_service import DatasetService, split_dataset
from amct.services.training_service import (
    TrainingService,
    cell_seed_for,
    run_repeated,
    run_seed,
    run_training,
    sized_model_config,
    sweep,
)

from .conftest import SMALL_MODEL


def small_model(vocabulary, num_tasks=1, seed=0):
    config = ModelConfig(vocab_size=len(vocabulary), num_tasks=num_tasks, **SMALL_MODEL)
    return AmctModel(config, seed=seed)


def with_train(run_config, **update):
    return run_config.model_copy(update={"train": run_config.train.model_copy(update=update)})


class TestBatching:
    def test_batch_sizes(self, toy_dataset, toy_vocabulary):
        five = toy_dataset.subset(range(5), "five")
        assert [batch.size for batch in make_batches(five, toy_vocabulary, 2, seed=0)] == [2, 2, 1]

    def test_same_seed_same_order(self, toy_dataset, toy_vocabulary):
        first = [b.molecule_ids.tolist() for b in make_batches(toy_dataset, toy_vocabulary, 3, seed=4)]
        second = [b.molecule_ids.tolist() for b in make_batches(toy_dataset, toy_vocabulary, 3, seed=4)]
        assert first == second
        assert sorted(sum(first, [])) == list(range(len(toy_dataset)))

    def test_no_seed_keeps_order(self, toy_dataset, toy_vocabulary):
        ids = [b.molecule_ids.tolist() for b in make_batches(toy_dataset, toy_vocabulary, 3)]
        assert sum(ids, []) == list(range(len(toy_dataset)))

    def test_motif_ids_within_table(self, toy_dataset, toy_vocabulary):
        for batch in make_batches(toy_dataset, toy_vocabulary, 3, seed=1):
            assert batch.motif_ids.max() < len(toy_vocabulary) + 1
            assert np.all(batch.motif_labels() > 0)
            assert batch.motif_labels().size == batch.motif_mask.sum()

    def test_padding_masks(self, toy_dataset, toy_vocabulary):
        batch = next(make_batches(toy_dataset, toy_vocabulary, len(toy_dataset)))
        for row, record in enumerate(toy_dataset):
            assert batch.atom_mask[row].sum() == record.num_atoms
            assert batch.motif_mask[row].sum() == record.num_motifs
        assert batch.atom_mask.dtype == np.bool_

    def test_empty_dataset(self, toy_vocabulary):
        with pytest.raises(EmptyDataset):
            next(make_batches(MoleculeDataset(records=[], task_names=["y"]), toy_vocabulary, 2))


class TestOptimizer:
    def test_zero_learning_rate_changes_nothing(self, toy_dataset, toy_vocabulary):
        model = small_model(toy_vocabulary)
        before = {name: values.copy() for name, values in model.state_dict().items()}
        service = TrainingService(model, TrainConfig(learning_rate=0.0), toy_vocabulary)
        service.train_epoch(make_batches(toy_dataset, toy_vocabulary, 4, seed=0))
        for name, values in model.state_dict().items():
            assert values.tobytes() == before[name].tobytes(), name

    def test_one_step_decreases_regression_loss(self):
        dataset = DatasetService().from_rows([("CCO", [3.0])], ["y"])
        vocabulary = MotifVocabulary()
        for key in dataset[0].motif_set.keys:
            vocabulary.insert(key)
        model = small_model(vocabulary, seed=0)
        config = TrainConfig(task=TaskKind.REGRESSION, learning_rate=1e-4, lambda_a=0.0, lambda_b=0.0)
        service = TrainingService(model, config, vocabulary)
        batch = next(make_batches(dataset, vocabulary, 1))
        model.train()
        before = service.compute_losses(batch).total.item()
        service.train_step(batch)
        after = service.compute_losses(batch).total.item()
        assert after < before

    def test_adam_follows_gradient_sign(self):
        weight = Tensor(np.array([1.0, -1.0]), requires_grad=True)
        optimizer = Adam([weight], learning_rate=0.1)
        ops.reduce_sum(ops.elementwise_mul(weight, weight)).backward()
        optimizer.step()
        np.testing.assert_allclose(weight.data, [0.9, -0.9], atol=1e-6)

    def test_clip_grad_norm(self):
        weight = Tensor(np.zeros(2), requires_grad=True)
        weight.grad = np.array([3.0, 4.0])
        assert clip_grad_norm([weight], 1.0) == pytest.approx(5.0)
        np.testing.assert_allclose(weight.grad, [0.6, 0.8])


class TestTrainingService:
    def test_disabled_auxiliary_losses_are_exact_zeros(self, toy_dataset, toy_vocabulary):
        config = TrainConfig(epochs=1, batch_size=4).with_ablations([Ablation.NO_ALOSS, Ablation.NO_CLOSS])
        history = TrainingService(small_model(toy_vocabulary), config, toy_vocabulary).fit(toy_dataset)
        assert history[0].align == 0.0
        assert history[0].contrastive == 0.0
        assert history[0].total == pytest.approx(history[0].sup_o + history[0].sup_h)

    def test_no_paware_skips_the_decoder(self, toy_dataset, toy_vocabulary):
        config = TrainConfig(epochs=1, batch_size=4).with_ablations([Ablation.NO_PAWARE])
        assert config.effective_prediction_source == PredictionSource.READOUT
        history = TrainingService(small_model(toy_vocabulary), config, toy_vocabulary).fit(toy_dataset)
        assert history[0].sup_o == 0.0
        assert history[0].sup_h > 0.0

    def test_components_are_logged(self, tmp_path, toy_dataset, toy_vocabulary):
        log = TrainingLogRepository(tmp_path / "train.log.jsonl")
        log.reset()
        config = TrainConfig(epochs=2, batch_size=4)
        service = TrainingService(small_model(toy_vocabulary), config, toy_vocabulary, log, run_id="r1")
        service.fit(toy_dataset, toy_dataset)
        records = log.read_all()
        assert [record.epoch for record in records] == [1, 2]
        assert all(record.run_id == "r1" for record in records)
        assert all(record.eval_metric is not None for record in records)
        assert all(record.align > 0.0 and record.contrastive > 0.0 for record in records)

    def test_unlabelled_batches_are_skipped(self, toy_vocabulary):
        rows = [("CCO", [float("nan")]), ("CCC", [float("nan")])]
        dataset = DatasetService().from_rows(rows, ["y"])
        service = TrainingService(small_model(toy_vocabulary), TrainConfig(), toy_vocabulary)
        with pytest.raises(NoLabels):
            service.train_epoch(make_batches(dataset, toy_vocabulary, 1))

    def test_non_finite_loss_diverges(self, monkeypatch, toy_dataset, toy_vocabulary):
        monkeypatch.setattr(training_service, "supervised_loss", lambda *args, **kwargs: ops.log(Tensor(0.0)))
        service = TrainingService(small_model(toy_vocabulary), TrainConfig(), toy_vocabulary)
        with pytest.raises(DivergedLoss) as info:
            service.train_epoch(make_batches(toy_dataset, toy_vocabulary, 4))
        assert info.value.exit_code == 4

    def test_training_is_deterministic(self, toy_dataset, toy_vocabulary, small_run_config):
        first = run_training(toy_dataset, toy_vocabulary, small_run_config, valid=toy_dataset)
        second = run_training(toy_dataset, toy_vocabulary, small_run_config, valid=toy_dataset)
        assert [r.model_dump() for r in first.history] == [r.model_dump() for r in second.history]
        for name, values in first.model.state_dict().items():
            assert values.tobytes() == second.model.state_dict()[name].tobytes()

    def test_sized_model_config(self, toy_vocabulary):
        config = sized_model_config(ModelConfig(), toy_vocabulary, 3)
        assert config.vocab_size == len(toy_vocabulary)
        assert config.num_tasks == 3

    def test_dataset_without_tasks_is_a_config_error(self, toy_vocabulary, small_run_config):
        dataset = DatasetService().from_rows([("CCO", []), ("CC=O", [])], [], "no-tasks")
        with pytest.raises(ConfigError) as info:
            run_training(dataset, toy_vocabulary, small_run_config, valid=dataset)
        assert info.value.exit_code == 2


class TestSplit:
    def test_sizes_and_disjointness(self, toy_dataset):
        config = TrainConfig(train_fraction=0.5, valid_fraction=0.25, test_fraction=0.25, seed=3)
        splits = split_dataset(toy_dataset, config)
        assert (len(splits.train), len(splits.valid), len(splits.test)) == (4, 2, 2)
        ids = [record.molecule_id for part in (splits.train, splits.valid, splits.test) for record in part]
        assert sorted(ids) == list(range(8))

    def test_same_seed_same_split(self, toy_dataset):
        config = TrainConfig(train_fraction=0.5, valid_fraction=0.25, test_fraction=0.25, seed=3)
        first = [r.molecule_id for r in split_dataset(toy_dataset, config).test]
        second = [r.molecule_id for r in split_dataset(toy_dataset, config).test]
        assert first == second

    def test_fractions_must_fit(self):
        with pytest.raises(ValueError):
            TrainConfig(train_fraction=0.8, valid_fraction=0.2, test_fraction=0.2)


class TestRepeatedRuns:
    def test_seeds_and_aggregation(self, tmp_path, toy_dataset, toy_vocabulary, small_run_config):
        config = with_train(small_run_config, runs=2)
        log = TrainingLogRepository(tmp_path / "runs.log.jsonl")
        log.reset()
        result = run_repeated(toy_dataset, toy_vocabulary, config, valid=toy_dataset, log_repository=log)
        assert [run.seed for run in result.runs] == [run_seed(7, 0), run_seed(7, 1)]
        assert result.runs[0].seed == 7
        assert result.report.runs == 2
        means = [report.mean for report in result.reports]
        assert result.report.mean == pytest.approx(np.mean(means))
        assert result.report.std == pytest.approx(np.std(means))
        assert [(r.run, r.epoch) for r in log.read_all()] == [(0, 1), (0, 2), (1, 1), (1, 2)]


class TestSweep:
    def test_three_by_three(self, toy_dataset, toy_vocabulary, small_run_config):
        grid = SweepGrid(lambda_a=[0.0, 0.1, 1.0], lambda_b=[0.0, 0.1, 1.0])
        rows = sweep(grid, toy_dataset, toy_vocabulary, small_run_config, valid=toy_dataset)
        assert len(rows) == 9
        assert [(row.lambda_a, row.lambda_b) for row in rows] == [
            (a, b) for a in (0.0, 0.1, 1.0) for b in (0.0, 0.1, 1.0)
        ]
        assert all(0.0 <= row.metric_mean <= 1.0 and row.metric_std == 0.0 for row in rows)

    def test_grid_order_does_not_matter(self, toy_dataset, toy_vocabulary, small_run_config):
        forward = sweep(SweepGrid(lambda_a=[0.1, 0.5], lambda_b=[0.2]), toy_dataset, toy_vocabulary,
                        small_run_config, valid=toy_dataset)
        backward = sweep(SweepGrid(lambda_a=[0.5, 0.1], lambda_b=[0.2]), toy_dataset, toy_vocabulary,
                         small_run_config, valid=toy_dataset)
        by_cell = {(row.lambda_a, row.lambda_b): row.metric_mean for row in backward}
        for row in forward:
            assert by_cell[(row.lambda_a, row.lambda_b)] == row.metric_mean

    def test_single_cell_equals_single_run(self, toy_dataset, toy_vocabulary, small_run_config):
        [row] = sweep(SweepGrid(lambda_a=[0.3], lambda_b=[0.4]), toy_dataset, toy_vocabulary,
                      small_run_config, valid=toy_dataset)
        config = with_train(small_run_config, lambda_a=0.3, lambda_b=0.4)
        single = run_repeated(toy_dataset, toy_vocabulary, config, valid=toy_dataset,
                              seed=cell_seed_for(small_run_config.train.seed, 0.3, 0.4))
        assert row.metric_mean == single.report.mean

    def test_divergence_propagates(self, monkeypatch, toy_dataset, toy_vocabulary, small_run_config):
        monkeypatch.setattr(training_service, "supervised_loss", lambda *args, **kwargs: ops.log(Tensor(0.0)))
        with pytest.raises(DivergedLoss):
            sweep(SweepGrid(lambda_a=[0.1], lambda_b=[0.1]), toy_dataset, toy_vocabulary, small_run_config,
                  valid=toy_dataset)

    def test_grid_rejects_empty_axis(self):
        with pytest.raises(ValueError):
            SweepGrid(lambda_a=[], lambda_b=[0.1])


def test_run_config_defaults_are_valid():
    config = RunConfig()
    assert config.train.loss_weights().lambda_a == config.train.lambda_a
