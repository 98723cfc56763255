"""
Pydantic schemas for model and training configuration.
"""

from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class TaskKind(str, Enum):
    """Supervised task kind."""
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


class PredictionSource(str, Enum):
    """Which head produces inference-time predictions."""
    DECODER = "decoder"
    READOUT = "readout"


class Ablation(str, Enum):
    """Named ablations accepted by the CLI."""
    NO_ALOSS = "no-aloss"
    NO_CLOSS = "no-closs"
    NO_PAWARE = "no-paware"


class ModelConfig(BaseModel):
    """Network shape: d, h, N, L, c and table sizes."""
    model_config = ConfigDict(extra="forbid")

    d_model: int = Field(32, ge=1)
    num_heads: int = Field(2, ge=1)
    num_encoder_layers: int = Field(2, ge=0)
    num_decoder_layers: int = Field(1, ge=1)
    num_tasks: int = Field(1, ge=1)
    max_atom_degree: int = Field(6, ge=0)
    max_motif_degree: int = Field(8, ge=0)
    vocab_size: int = Field(0, ge=0)
    ffn_multiplier: int = Field(2, ge=1)
    dropout_rate: float = Field(0.1, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def validate_heads(self) -> "ModelConfig":
        """d_model must split evenly across heads."""
        if self.d_model % self.num_heads != 0:
            raise ValueError(
                f"d_model ({self.d_model}) must be divisible by num_heads ({self.num_heads})"
            )
        return self

    @property
    def d_k(self) -> int:
        return self.d_model // self.num_heads


class LossWeights(BaseModel):
    """Weights of the auxiliary losses and the softening temperature."""
    model_config = ConfigDict(extra="forbid")

    lambda_a: float = Field(0.1, ge=0.0, allow_inf_nan=False)
    lambda_b: float = Field(0.1, ge=0.0, allow_inf_nan=False)
    temperature: float = Field(4.0, gt=0.0, allow_inf_nan=False)


class TrainConfig(BaseModel):
    """Optimization, loss weighting, ablation and split settings."""
    model_config = ConfigDict(extra="forbid")

    epochs: int = Field(100, ge=0)
    batch_size: int = Field(32, ge=1)
    learning_rate: float = Field(1e-3, ge=0.0)
    beta1: float = Field(0.9, ge=0.0, lt=1.0)
    beta2: float = Field(0.999, ge=0.0, lt=1.0)
    eps: float = Field(1e-8, gt=0.0)
    weight_decay: float = Field(0.0, ge=0.0)
    grad_clip: float = Field(5.0, gt=0.0)
    seed: int = Field(0, ge=0)
    runs: int = Field(1, ge=1)

    lambda_a: float = Field(0.1, ge=0.0, allow_inf_nan=False)
    lambda_b: float = Field(0.1, ge=0.0, allow_inf_nan=False)
    temperature: float = Field(4.0, gt=0.0, allow_inf_nan=False)
    alpha: float = Field(0.5, ge=0.0, le=1.0)
    max_contrast: int = Field(512, ge=1)

    no_align: bool = False
    no_contrastive: bool = False
    no_paware: bool = False
    predict_from: PredictionSource = PredictionSource.DECODER

    task: TaskKind = TaskKind.CLASSIFICATION
    train_fraction: float = Field(0.8, gt=0.0, le=1.0)
    valid_fraction: float = Field(0.1, ge=0.0, le=1.0)
    test_fraction: float = Field(0.1, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def validate_fractions(self) -> "TrainConfig":
        """Split fractions must sum to at most one."""
        total = self.train_fraction + self.valid_fraction + self.test_fraction
        if total > 1.0 + 1e-9:
            raise ValueError(f"split fractions sum to {total:.3f} > 1")
        return self

    def loss_weights(self) -> LossWeights:
        """Loss weights with ablation switches applied."""
        return LossWeights(
            lambda_a=0.0 if self.no_align else self.lambda_a,
            lambda_b=0.0 if self.no_contrastive else self.lambda_b,
            temperature=self.temperature,
        )

    @property
    def effective_prediction_source(self) -> PredictionSource:
        """The decoder is skipped entirely under the no_paware ablation."""
        if self.no_paware:
            return PredictionSource.READOUT
        return self.predict_from

    def with_ablations(self, ablations: List[Ablation]) -> "TrainConfig":
        """Copy with the named ablations switched on."""
        update = {}
        for ablation in ablations:
            if ablation == Ablation.NO_ALOSS:
                update["no_align"] = True
            elif ablation == Ablation.NO_CLOSS:
                update["no_contrastive"] = True
            elif ablation == Ablation.NO_PAWARE:
                update["no_paware"] = True
        return self.model_copy(update=update)


class RunConfig(BaseModel):
    """Config file contents: `{"model": {...}, "train": {...}}`."""
    model_config = ConfigDict(extra="forbid")

    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)


class SweepGrid(BaseModel):
    """Grid of loss weights for the sensitivity sweep."""
    model_config = ConfigDict(extra="forbid")

    lambda_a: List[float] = Field(..., min_length=1)
    lambda_b: List[float] = Field(..., min_length=1)

    @field_validator("lambda_a", "lambda_b")
    @classmethod
    def validate_values(cls, v: List[float]) -> List[float]:
        """Grid values must be finite and non-negative."""
        for value in v:
            if not value >= 0.0 or value == float("inf"):
                raise ValueError(f"grid value {value} must be finite and >= 0")
        return v
