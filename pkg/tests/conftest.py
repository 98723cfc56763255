"""
Shared fixtures: a labelled toy corpus, its vocabulary and small configs.
"""

import json
import os

import numpy as np
import pytest

import amct.config
from amct.schemas.config import ModelConfig, RunConfig, TrainConfig
from amct.services.dataset_service import DatasetService
from amct.services.vocabulary_service import vocabulary_from_motif_sets

TOY_ROWS = [
    ("C1CCCCC1O", [1.0]),
    ("CCO", [0.0]),
    ("c1ccccc1", [1.0]),
    ("CC(C)C", [0.0]),
    ("CC(=S)C", [1.0]),
    ("CCN", [0.0]),
    ("C1CCNCC1", [1.0]),
    ("CCC", [0.0]),
]

SMALL_MODEL = {
    "d_model": 8,
    "num_heads": 2,
    "num_encoder_layers": 1,
    "num_decoder_layers": 1,
    "dropout_rate": 0.0,
}


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch):
    """Drop AMCT_* variables and the cached settings around every test."""

    for name in list(os.environ):
        if name.startswith("AMCT_"):
            monkeypatch.delenv(name, raising=False)
    monkeypatch.setattr(amct.config, "_settings", None)
    yield
    amct.config._settings = None


@pytest.fixture
def toy_dataset():
    return DatasetService().from_rows(TOY_ROWS, ["active"], name="toy")


@pytest.fixture
def toy_vocabulary(toy_dataset):
    return vocabulary_from_motif_sets(record.motif_set for record in toy_dataset)


@pytest.fixture
def small_model_config(toy_vocabulary):
    return ModelConfig(vocab_size=len(toy_vocabulary), num_tasks=1, **SMALL_MODEL)


@pytest.fixture
def small_run_config():
    return RunConfig(
        model=ModelConfig(**SMALL_MODEL),
        train=TrainConfig(epochs=2, batch_size=4, learning_rate=1e-2, seed=7),
    )


@pytest.fixture
def toy_csv(tmp_path):
    path = tmp_path / "toy.csv"
    lines = ["smiles,active"] + [f"{smiles},{int(labels[0])}" for smiles, labels in TOY_ROWS]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def small_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "model": SMALL_MODEL,
        "train": {"epochs": 2, "batch_size": 4, "learning_rate": 0.01},
    }), encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(0)
