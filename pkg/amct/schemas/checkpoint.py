"""
Pydantic schema of the checkpoint container header.
"""

from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import ModelConfig, TrainConfig

CHECKPOINT_FORMAT = "amct-checkpoint/1"


class TensorEntry(BaseModel):
    """Location of one parameter's payload, relative to the payload start."""
    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1)
    shape: Tuple[int, ...]
    dtype: str = "<f8"
    offset: int = Field(..., ge=0)
    nbytes: int = Field(..., ge=0)


class CheckpointHeader(BaseModel):
    """JSON manifest stored at the front of a checkpoint file."""
    model_config = ConfigDict(extra="forbid")

    format_version: str = CHECKPOINT_FORMAT
    network: ModelConfig
    train: Optional[TrainConfig] = None
    vocabulary_hash: str
    run_id: str = ""
    seed: int = 0
    tensors: List[TensorEntry]

    @model_validator(mode="after")
    def validate_layout(self) -> "CheckpointHeader":
        """Payloads are contiguous, in manifest order, and sized by their shape."""
        position = 0
        names = set()
        for entry in self.tensors:
            if entry.name in names:
                raise ValueError(f"duplicate tensor name {entry.name}")
            names.add(entry.name)
            if entry.dtype != "<f8":
                raise ValueError(f"{entry.name}: unsupported dtype {entry.dtype}")
            size = 8
            for dim in entry.shape:
                size *= dim
            if entry.offset != position or entry.nbytes != size:
                raise ValueError(f"{entry.name}: payload layout is not contiguous")
            position += size
        return self

    @property
    def payload_size(self) -> int:
        return sum(entry.nbytes for entry in self.tensors)
