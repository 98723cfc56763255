"""
Checkpoint repository.

Container layout:
    8-byte magic b"AMCTCKPT"
    little-endian uint64 header length
    UTF-8 JSON CheckpointHeader
    raw little-endian float64 payloads, contiguous, in header order
"""

import struct
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import structlog
from pydantic import ValidationError

from ..exceptions import ArtifactFormatError, VocabMismatch
from ..network.amct_model import AmctModel
from ..schemas.checkpoint import CheckpointHeader, TensorEntry
from ..schemas.config import TrainConfig
from .base import PathLike

logger = structlog.get_logger(__name__)

MAGIC = b"AMCTCKPT"
_LENGTH = struct.Struct("<Q")


class CheckpointRepository:
    """Repository for model checkpoint container files."""

    def save(
        self,
        path: PathLike,
        model: AmctModel,
        vocabulary_hash: str,
        run_id: str = "",
        seed: int = 0,
        train_config: Optional[TrainConfig] = None,
    ) -> Path:
        """
        Write all parameters bit-exactly.

        Args:
            path: Destination file
            model: Model to store
            vocabulary_hash: Content hash of the vocabulary the model was trained with
            run_id: Manifest run id of the producing command
            seed: Initialization seed
            train_config: Training settings, kept so evaluation can re-create the split

        Returns:
            Path: The written path
        """
        entries = []
        payloads = []
        offset = 0
        for name, parameter in model.named_parameters():
            payload = np.ascontiguousarray(parameter.data, dtype="<f8").tobytes()
            entries.append(TensorEntry(name=name, shape=parameter.shape, offset=offset, nbytes=len(payload)))
            payloads.append(payload)
            offset += len(payload)
        header = CheckpointHeader(
            network=model.config,
            train=train_config,
            vocabulary_hash=vocabulary_hash,
            run_id=run_id,
            seed=seed,
            tensors=entries,
        )
        header_bytes = header.model_dump_json().encode("utf-8")

        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "wb") as handle:
            handle.write(MAGIC)
            handle.write(_LENGTH.pack(len(header_bytes)))
            handle.write(header_bytes)
            for payload in payloads:
                handle.write(payload)
        logger.info("checkpoint_saved", path=str(target), tensors=len(entries), bytes=offset)
        return target

    def _read(self, path: PathLike) -> Tuple[CheckpointHeader, bytes]:
        try:
            blob = Path(path).read_bytes()
        except OSError as e:
            raise ArtifactFormatError(f"cannot read checkpoint {path}: {e}") from e
        prefix = len(MAGIC) + _LENGTH.size
        if len(blob) < prefix or blob[:len(MAGIC)] != MAGIC:
            raise ArtifactFormatError(f"{path} is not a checkpoint file")
        (header_length,) = _LENGTH.unpack_from(blob, len(MAGIC))
        try:
            header = CheckpointHeader.model_validate_json(blob[prefix:prefix + header_length])
        except ValidationError as e:
            raise ArtifactFormatError(f"{path}: invalid checkpoint header: {e}") from e
        payload = blob[prefix + header_length:]
        if len(payload) != header.payload_size:
            raise ArtifactFormatError(
                f"{path}: payload is {len(payload)} bytes, header declares {header.payload_size}"
            )
        return header, payload

    def read_header(self, path: PathLike) -> CheckpointHeader:
        return self._read(path)[0]

    def load(self, path: PathLike, vocabulary_hash: Optional[str] = None) -> Tuple[AmctModel, CheckpointHeader]:
        """
        Rebuild the model stored in a checkpoint.

        Args:
            path: Checkpoint file
            vocabulary_hash: If given, must equal the stored vocabulary hash

        Returns:
            Tuple of the model (in eval mode) and its header

        Raises:
            ArtifactFormatError: If the file is malformed
            VocabMismatch: If the vocabulary hash differs
        """
        header, payload = self._read(path)
        if vocabulary_hash is not None and vocabulary_hash != header.vocabulary_hash:
            raise VocabMismatch(
                f"checkpoint was trained with vocabulary {header.vocabulary_hash[:12]}, "
                f"got {vocabulary_hash[:12]}"
            )
        state = {
            entry.name: np.frombuffer(payload, dtype="<f8", count=entry.nbytes // 8, offset=entry.offset)
            .reshape(entry.shape)
            .astype(np.float64)
            for entry in header.tensors
        }
        model = AmctModel(header.network, seed=header.seed)
        try:
            model.load_state_dict(state)
        except (KeyError, ValueError) as e:
            raise ArtifactFormatError(f"{path}: {e}") from e
        model.eval()
        return model, header
