"""
Tests for the AUC / RMSE metrics, prediction and run aggregation.
"""

import numpy as np
import pytest

from amct.exceptions import EmptyDataset, NoLabels, SingleClass
from amct.models.dataset import MoleculeDataset
from amct.network.amct_model import AmctModel
from amct.schemas.config import ModelConfig, PredictionSource, TaskKind
from amct.schemas.report import EvalReport, MetricKind
from amct.services.evaluation_service import aggregate_runs, evaluate, predict, rmse, roc_auc, score_predictions

from .conftest import SMALL_MODEL
from .helpers import pairwise_auc


@pytest.fixture
def toy_model(toy_vocabulary):
    config = ModelConfig(vocab_size=len(toy_vocabulary), num_tasks=1, **SMALL_MODEL)
    return AmctModel(config, seed=11)


class TestRocAuc:
    def test_matches_pairwise_count(self, rng):
        for _ in range(500):
            size = int(rng.integers(2, 30))
            labels = rng.integers(0, 2, size=size).astype(float)
            if labels.min() == labels.max():
                labels[0] = 1.0 - labels[0]
            # coarse rounding produces ties
            scores = np.round(rng.normal(size=size), 1)
            assert roc_auc(labels, scores) == pytest.approx(pairwise_auc(labels, scores), abs=1e-12)

    def test_ties_count_half(self):
        labels = np.array([1, 1, 1, 0, 0, 0], dtype=float)
        scores = np.array([3, 3, 1, 2, 1, 0], dtype=float)
        assert roc_auc(labels, scores) == pytest.approx(7.5 / 9)

    def test_perfect_and_reversed_ranking(self):
        labels = np.array([0, 0, 1, 1], dtype=float)
        assert roc_auc(labels, np.array([0.1, 0.2, 0.3, 0.4])) == 1.0
        assert roc_auc(labels, np.array([0.4, 0.3, 0.2, 0.1])) == 0.0

    def test_constant_scores(self):
        assert roc_auc(np.array([0, 1, 0, 1.0]), np.zeros(4)) == 0.5

    def test_single_class(self):
        with pytest.raises(SingleClass):
            roc_auc(np.ones(4), np.arange(4.0))


class TestRmse:
    def test_value(self):
        assert rmse(np.array([1.0, 2.0]), np.array([1.0, 4.0])) == pytest.approx(np.sqrt(2.0))

    def test_exact_predictions(self):
        assert rmse(np.array([0.5, -3.0]), np.array([0.5, -3.0])) == 0.0

    def test_no_labels(self):
        with pytest.raises(NoLabels):
            rmse(np.zeros(0), np.zeros(0))


class TestScorePredictions:
    def test_single_class_task_is_skipped(self):
        labels = np.array([[1.0, 1.0], [0.0, 1.0], [1.0, np.nan]])
        outputs = np.array([[2.0, 0.0], [-1.0, 0.0], [3.0, 0.0]])
        report = score_predictions(labels, outputs, TaskKind.CLASSIFICATION)
        assert report.metric == MetricKind.AUC
        assert report.per_task == [1.0, None]
        assert report.skipped_tasks == [1]
        assert report.mean == 1.0

    def test_missing_labels_are_ignored(self):
        labels = np.array([[1.0], [np.nan], [0.0]])
        outputs = np.array([[5.0], [np.nan], [-5.0]])
        assert score_predictions(labels, outputs, TaskKind.CLASSIFICATION).mean == 1.0

    def test_every_task_single_class(self):
        with pytest.raises(SingleClass):
            score_predictions(np.ones((3, 2)), np.zeros((3, 2)), TaskKind.CLASSIFICATION)

    def test_regression_averages_tasks(self):
        labels = np.array([[1.0, 0.0], [3.0, 0.0]])
        outputs = np.array([[1.0, 2.0], [3.0, 2.0]])
        report = score_predictions(labels, outputs, TaskKind.REGRESSION)
        assert report.metric == MetricKind.RMSE
        assert report.per_task == [0.0, 2.0]
        assert report.mean == 1.0

    def test_regression_without_labels(self):
        with pytest.raises(NoLabels):
            score_predictions(np.full((2, 1), np.nan), np.zeros((2, 1)), TaskKind.REGRESSION)


class TestPredict:
    def test_worker_count_does_not_change_outputs(self, toy_model, toy_dataset, toy_vocabulary):
        serial = predict(toy_model, toy_dataset, toy_vocabulary, batch_size=2, workers=1)
        threaded = predict(toy_model, toy_dataset, toy_vocabulary, batch_size=2, workers=3)
        assert serial.shape == (len(toy_dataset), 1)
        assert serial.tobytes() == threaded.tobytes()

    def test_batch_size_does_not_change_outputs(self, toy_model, toy_dataset, toy_vocabulary):
        one = predict(toy_model, toy_dataset, toy_vocabulary, batch_size=1)
        all_at_once = predict(toy_model, toy_dataset, toy_vocabulary, batch_size=64)
        np.testing.assert_allclose(one, all_at_once, rtol=0, atol=1e-9)

    def test_prediction_sources_differ(self, toy_model, toy_dataset, toy_vocabulary):
        decoder = predict(toy_model, toy_dataset, toy_vocabulary, PredictionSource.DECODER)
        readout = predict(toy_model, toy_dataset, toy_vocabulary, PredictionSource.READOUT)
        assert not np.allclose(decoder, readout)

    def test_empty_dataset(self, toy_model, toy_vocabulary):
        with pytest.raises(EmptyDataset):
            predict(toy_model, MoleculeDataset(records=[], task_names=["active"]), toy_vocabulary)

    def test_evaluate_scores_in_range(self, toy_model, toy_dataset, toy_vocabulary):
        report = evaluate(toy_model, toy_dataset, toy_vocabulary, TaskKind.CLASSIFICATION)
        assert 0.0 <= report.mean <= 1.0
        assert report.runs == 1


class TestAggregateRuns:
    def test_population_std(self):
        reports = [
            EvalReport(metric=MetricKind.AUC, per_task=[0.5, None], mean=0.5),
            EvalReport(metric=MetricKind.AUC, per_task=[0.7, 0.9], mean=0.7),
        ]
        aggregate = aggregate_runs(reports)
        assert aggregate.mean == pytest.approx(0.6)
        assert aggregate.std == pytest.approx(0.1)
        assert aggregate.runs == 2
        assert aggregate.per_task == [pytest.approx(0.6), 0.9]

    def test_single_run_has_zero_spread(self):
        aggregate = aggregate_runs([EvalReport(metric=MetricKind.RMSE, per_task=[1.5], mean=1.5)])
        assert aggregate.std == 0.0

    def test_nothing_to_aggregate(self):
        with pytest.raises(ValueError):
            aggregate_runs([])

    def test_auc_range_is_validated(self):
        with pytest.raises(ValueError):
            EvalReport(metric=MetricKind.AUC, per_task=[1.2], mean=1.2)
