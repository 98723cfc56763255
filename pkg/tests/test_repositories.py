"""
Tests for dataset CSV ingestion, JSON/CSV artifact repositories and the
artifact checker.
"""

import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from amct.exceptions import ArtifactFormatError, DatasetFormatError
from amct.network.amct_model import AmctModel
from amct.repositories.checkpoint_repository import CheckpointRepository
from amct.repositories.dataset_repository import DatasetRepository
from amct.repositories.log_repository import TrainingLogRepository
from amct.repositories.manifest_repository import ManifestRepository, manifest_path_for
from amct.repositories.report_repository import EXPLANATION_COLUMNS, SWEEP_COLUMNS, ReportRepository
from amct.repositories.vocabulary_repository import VocabularyRepository
from amct.schemas.config import ModelConfig, TaskKind
from amct.schemas.report import EpochLogRecord, ExplanationCsvRow, RunManifest, SweepRow
from amct.services.artifact_checker import ArtifactKind, check
from amct.services.dataset_service import DatasetService

from .conftest import SMALL_MODEL


def write(tmp_path, name, text, newline="\n"):
    path = tmp_path / name
    path.write_bytes(text.replace("\n", newline).encode("utf-8"))
    return path


def log_record(epoch, run=0, run_id="r"):
    return EpochLogRecord(run_id=run_id, run=run, epoch=epoch, sup_o=0.5, sup_h=0.25, align=0.1,
                          contrastive=0.2, total=0.78)


def manifest(**overrides):
    fields = dict(command="train", code_version="0.1.0", seed=3, outputs={"checkpoint": "m.ckpt"},
                  created_at=datetime(2024, 1, 1, tzinfo=timezone.utc))
    fields.update(overrides)
    return RunManifest(**fields)


class TestDatasetRepository:
    def test_missing_labels_and_blank_lines(self, tmp_path):
        path = write(tmp_path, "data.csv", "smiles,a,b\nCCO,1,\nCCC,0,1\n\nCCN,,0\n")
        table = DatasetRepository().read(path)
        assert table.task_names == ["a", "b"]
        assert [row.smiles for row in table.rows] == ["CCO", "CCC", "CCN"]
        assert [row.line for row in table.rows] == [2, 3, 5]
        assert [row.row_index for row in table.rows] == [0, 1, 2]
        np.testing.assert_array_equal(table.rows[0].labels, [1.0, np.nan])
        np.testing.assert_array_equal(table.rows[2].labels, [np.nan, 0.0])

    def test_crlf_line_endings(self, tmp_path):
        lf = DatasetRepository().read(write(tmp_path, "lf.csv", "smiles,y\nCCO,1\nCCC,0\n"))
        crlf = DatasetRepository().read(write(tmp_path, "crlf.csv", "smiles,y\nCCO,1\nCCC,0\n", "\r\n"))
        assert [r.smiles for r in crlf.rows] == [r.smiles for r in lf.rows]
        assert [r.labels.tolist() for r in crlf.rows] == [r.labels.tolist() for r in lf.rows]

    def test_unparsable_label_reports_line(self, tmp_path):
        path = write(tmp_path, "bad.csv", "smiles,y\nCCO,1\nCCC,abc\n")
        with pytest.raises(DatasetFormatError) as info:
            DatasetRepository().read(path)
        assert info.value.line == 3
        assert info.value.message.startswith("line 3:")
        assert info.value.exit_code == 2

    def test_empty_file(self, tmp_path):
        table = DatasetRepository().read(write(tmp_path, "empty.csv", ""))
        assert table.rows == [] and table.task_names == []

    def test_wrong_header(self, tmp_path):
        with pytest.raises(DatasetFormatError) as info:
            DatasetRepository().read(write(tmp_path, "h.csv", "molecule,y\nCCO,1\n"))
        assert info.value.line == 1

    def test_hash_tracks_bytes(self, tmp_path):
        first = DatasetRepository().read(write(tmp_path, "a.csv", "smiles,y\nCCO,1\n"))
        second = DatasetRepository().read(write(tmp_path, "b.csv", "smiles,y\nCCO,0\n"))
        assert len(first.source_hash) == 64
        assert first.source_hash != second.source_hash

    def test_missing_file(self, tmp_path):
        with pytest.raises(DatasetFormatError):
            DatasetRepository().read(tmp_path / "absent.csv")


class TestDatasetService:
    def test_load_featurizes_rows(self, toy_csv, toy_dataset):
        dataset = DatasetService().load(toy_csv, TaskKind.CLASSIFICATION)
        assert len(dataset) == len(toy_dataset)
        assert dataset.task_names == ["active"]
        assert dataset.name == "toy"
        assert [r.smiles for r in dataset] == [r.smiles for r in toy_dataset]

    def test_bad_smiles_reports_line(self, tmp_path):
        path = write(tmp_path, "d.csv", "smiles,y\nCCO,1\n\nC1CC,0\n")
        with pytest.raises(DatasetFormatError) as info:
            DatasetService().load(path)
        assert info.value.line == 4

    def test_whitespace_in_smiles(self, tmp_path):
        with pytest.raises(DatasetFormatError):
            DatasetService().load(write(tmp_path, "w.csv", 'smiles,y\n"C C",1\n'))

    def test_classification_labels_must_be_binary(self, tmp_path):
        path = write(tmp_path, "c.csv", "smiles,y\nCCO,1\nCCC,2\n")
        assert len(DatasetService().load(path, TaskKind.REGRESSION)) == 2
        with pytest.raises(DatasetFormatError) as info:
            DatasetService().load(path, TaskKind.CLASSIFICATION)
        assert info.value.line == 3


class TestTrainingLogRepository:
    def test_round_trip(self, tmp_path):
        repository = TrainingLogRepository(tmp_path / "logs" / "t.log.jsonl")
        repository.reset()
        records = [log_record(1), log_record(2), log_record(1, run=1)]
        for record in records:
            repository.append(record)
        assert repository.read_all() == records

    def test_reset_truncates(self, tmp_path):
        repository = TrainingLogRepository(tmp_path / "t.log.jsonl")
        repository.reset()
        repository.append(log_record(1))
        repository.reset()
        assert repository.read_all() == []

    def test_invalid_line(self, tmp_path):
        path = write(tmp_path, "t.log.jsonl", json.dumps(log_record(1).model_dump()) + "\n{\"epoch\": 0}\n")
        with pytest.raises(ArtifactFormatError, match="line 2"):
            TrainingLogRepository(path).read_all()


class TestManifest:
    def test_run_id_ignores_timestamp(self):
        first = manifest()
        second = manifest(created_at=first.created_at + timedelta(hours=5))
        assert len(first.run_id) == 16
        assert first.run_id == second.run_id

    def test_run_id_tracks_contents(self):
        assert manifest().run_id != manifest(seed=4).run_id

    def test_tampered_run_id(self):
        with pytest.raises(ValueError):
            manifest(run_id="0" * 16)

    def test_save_next_to_output(self, tmp_path):
        target = ManifestRepository().save_for(tmp_path / "model.ckpt", manifest())
        assert target == tmp_path / "model.ckpt.manifest.json"
        assert target == manifest_path_for(tmp_path / "model.ckpt")
        assert ManifestRepository().read(target) == manifest()


class TestReportRepository:
    def test_sweep_rows_round_trip(self, tmp_path):
        rows = [SweepRow(lambda_a=0.5, lambda_b=0.375, metric_mean=0.8125, metric_std=0.0625)]
        path = ReportRepository().write_rows(tmp_path / "sweep.csv", rows, SWEEP_COLUMNS)
        assert path.read_text().splitlines()[0] == ",".join(SWEEP_COLUMNS)
        assert ReportRepository().read_rows(path, SweepRow, SWEEP_COLUMNS) == rows

    def test_unknown_motif_ids_are_blank(self, tmp_path):
        rows = [
            ExplanationCsvRow(molecule_id=0, property="active", motif_id=4, weight=1.0),
            ExplanationCsvRow(molecule_id=0, property="active", motif_id=None, weight=0.25),
        ]
        path = ReportRepository().write_rows(tmp_path / "e.csv", rows, EXPLANATION_COLUMNS)
        assert path.read_text().splitlines()[1:] == ["0,active,4,1", "0,active,,0.25"]
        assert ReportRepository().read_rows(path, ExplanationCsvRow, EXPLANATION_COLUMNS) == rows

    def test_wrong_columns(self, tmp_path):
        path = write(tmp_path, "s.csv", "lambda_a,lambda_b\n0.1,0.2\n")
        with pytest.raises(ArtifactFormatError):
            ReportRepository().read_rows(path, SweepRow, SWEEP_COLUMNS)

    def test_invalid_row(self, tmp_path):
        path = write(tmp_path, "s.csv", "lambda_a,lambda_b,metric_mean,metric_std\n0.1,0.2,0.5,-1\n")
        with pytest.raises(ArtifactFormatError, match="line 2"):
            ReportRepository().read_rows(path, SweepRow, SWEEP_COLUMNS)


class TestArtifactChecker:
    def test_vocabulary(self, tmp_path, toy_vocabulary):
        VocabularyRepository().save(toy_vocabulary, tmp_path / "vocab.json")
        assert check(ArtifactKind.VOCAB, tmp_path / "vocab.json").items == len(toy_vocabulary)

    def test_log(self, tmp_path):
        repository = TrainingLogRepository(tmp_path / "t.log.jsonl")
        repository.reset()
        for record in (log_record(1), log_record(2), log_record(1, run=1)):
            repository.append(record)
        assert check("log", repository.path).items == 3

    def test_log_epochs_must_increase(self, tmp_path):
        repository = TrainingLogRepository(tmp_path / "t.log.jsonl")
        repository.reset()
        repository.append(log_record(2))
        repository.append(log_record(2))
        with pytest.raises(ArtifactFormatError, match="not increasing"):
            check(ArtifactKind.LOG, repository.path)

    def test_manifest(self, tmp_path):
        path = ManifestRepository().save_for(tmp_path / "m.ckpt", manifest())
        assert check(ArtifactKind.MANIFEST, path).items == 1

    def test_sweep(self, tmp_path):
        rows = [SweepRow(lambda_a=a, lambda_b=0.1, metric_mean=0.5, metric_std=0.0) for a in (0.0, 1.0)]
        path = ReportRepository().write_rows(tmp_path / "sweep.csv", rows, SWEEP_COLUMNS)
        assert check(ArtifactKind.SWEEP, path).items == 2

    def test_checkpoint(self, tmp_path, toy_vocabulary):
        model = AmctModel(ModelConfig(vocab_size=len(toy_vocabulary), num_tasks=1, **SMALL_MODEL), seed=0)
        path = tmp_path / "m.ckpt"
        CheckpointRepository().save(path, model, toy_vocabulary.content_hash(), run_id="r", seed=0)
        assert check(ArtifactKind.CHECKPOINT, path).items == len(model.state_dict())

    def test_wrong_kind_fails(self, tmp_path, toy_vocabulary):
        VocabularyRepository().save(toy_vocabulary, tmp_path / "vocab.json")
        with pytest.raises(ArtifactFormatError):
            check(ArtifactKind.MANIFEST, tmp_path / "vocab.json")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ArtifactFormatError, match="does not exist"):
            check(ArtifactKind.EXPLAIN, tmp_path / "absent.json")
