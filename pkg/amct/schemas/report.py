"""
Pydantic schemas for reports and on-disk artifacts.

These models double as the artifact checker: every JSON/CSV artifact the CLI
writes is validated against one of them.
"""

import hashlib
import json
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class MetricKind(str, Enum):
    """Evaluation metric; AUC higher is better, RMSE lower is better."""
    AUC = "auc"
    RMSE = "rmse"


class LossSummary(BaseModel):
    """Float view of one loss breakdown, as written to the training log."""
    sup_o: float
    sup_h: float
    align: float
    contrastive: float
    total: float


class EvalReport(BaseModel):
    """Per-task metric values, their mean, and the spread over repeated runs."""
    metric: MetricKind
    per_task: List[Optional[float]]
    skipped_tasks: List[int] = Field(default_factory=list)
    mean: float
    std: float = 0.0
    runs: int = 1

    @model_validator(mode="after")
    def validate_ranges(self) -> "EvalReport":
        """AUC lies in [0, 1]; RMSE is non-negative."""
        values = [v for v in self.per_task if v is not None] + [self.mean]
        for value in values:
            if self.metric == MetricKind.AUC and not 0.0 <= value <= 1.0:
                raise ValueError(f"AUC {value} outside [0, 1]")
            if self.metric == MetricKind.RMSE and value < 0.0:
                raise ValueError(f"RMSE {value} is negative")
        if self.std < 0.0:
            raise ValueError("std must be non-negative")
        return self


class EpochLogRecord(BaseModel):
    """One line of the JSON-lines training log."""
    model_config = ConfigDict(extra="forbid")

    run_id: str
    run: int = Field(0, ge=0)
    epoch: int = Field(..., ge=1)
    sup_o: float
    sup_h: float
    align: float
    contrastive: float
    total: float
    eval_metric: Optional[float] = None


class SweepRow(BaseModel):
    """One row of the sensitivity sweep CSV."""
    lambda_a: float
    lambda_b: float
    metric_mean: float
    metric_std: float = Field(..., ge=0.0)


class VocabularyEntry(BaseModel):
    """One motif key with its dense id and corpus count."""
    key: str = Field(..., min_length=1)
    id: int = Field(..., ge=0)
    count: int = Field(..., ge=1)


class VocabularyFile(BaseModel):
    """Vocabulary JSON: `{version, entries: [{key, id, count}]}` ordered by id."""
    model_config = ConfigDict(extra="forbid")

    version: str
    entries: List[VocabularyEntry]

    @field_validator("entries")
    @classmethod
    def validate_dense_ids(cls, v: List[VocabularyEntry]) -> List[VocabularyEntry]:
        """Ids must be 0..n-1 in file order and keys unique."""
        for position, entry in enumerate(v):
            if entry.id != position:
                raise ValueError(f"entry {position} has id {entry.id}; ids must be dense and ordered")
        if len({entry.key for entry in v}) != len(v):
            raise ValueError("duplicate motif keys")
        return v


class RunManifest(BaseModel):
    """Provenance record written next to every produced artifact."""
    command: str
    config: Dict[str, Any] = Field(default_factory=dict)
    dataset_hash: Optional[str] = None
    vocabulary_hash: Optional[str] = None
    code_version: str
    seed: Optional[int] = None
    outputs: Dict[str, str] = Field(default_factory=dict)
    created_at: datetime
    run_id: str = ""

    @model_validator(mode="after")
    def fill_run_id(self) -> "RunManifest":
        """run_id is derived from everything except the timestamp."""
        expected = self.compute_run_id()
        if not self.run_id:
            self.run_id = expected
        elif self.run_id != expected:
            raise ValueError("run_id does not match manifest contents")
        return self

    def compute_run_id(self) -> str:
        payload = self.model_dump(mode="json", exclude={"created_at", "run_id"})
        digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8"))
        return digest.hexdigest()[:16]


class MotifAttribution(BaseModel):
    """Normalized cross-attention weight of one motif for one property."""
    motif_index: int = Field(..., ge=0)
    motif_id: Optional[int] = None
    canonical_key: str
    atom_indices: List[int]
    weight: float = Field(..., ge=0.0, le=1.0)
    selected: bool


class PropertyExplanation(BaseModel):
    """All motifs of one molecule ranked for one property."""
    property: str
    property_index: int = Field(..., ge=0)
    degenerate: bool
    motifs: List[MotifAttribution]


class MoleculeExplanation(BaseModel):
    """Explanations of every property for one molecule."""
    molecule_id: int = Field(..., ge=0)
    smiles: str
    properties: List[PropertyExplanation]


class ExplanationReport(BaseModel):
    """explain command output."""
    model_config = ConfigDict(extra="forbid")

    run_id: str
    alpha: float = Field(..., ge=0.0, le=1.0)
    molecules: List[MoleculeExplanation]


class ExplanationCsvRow(BaseModel):
    """Plot-ready explain CSV row."""
    molecule_id: int = Field(..., ge=0)
    property: str
    motif_id: Optional[int] = None
    weight: float = Field(..., ge=0.0, le=1.0)
