"""
Error hierarchy for the toolkit.

Every error carries the process exit code the CLI reports for it:
0 ok, 1 internal/numerical, 2 input error, 3 vocabulary mismatch, 4 divergence.
"""

from typing import Optional


class AmctError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# Input errors (exit 2)


class InputError(AmctError):
    """Malformed or unusable user input."""

    exit_code = 2


class SmilesError(InputError):
    """Base class for SMILES parse failures."""

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class InvalidSmiles(SmilesError):
    """Empty or non-ASCII SMILES text."""


class UnsupportedToken(SmilesError):
    """A token outside the supported SMILES subset."""

    def __init__(self, token: str, offset: int, reason: str = "unsupported token"):
        super().__init__(f"{reason}: {token!r}", offset)
        self.token = token


class UnclosedRing(SmilesError):
    """A ring-closure label was opened but never closed."""


class UnclosedBranch(SmilesError):
    """A '(' without its matching ')'."""


class Disconnected(SmilesError):
    """The SMILES describes more than one fragment."""


class TooManyAtoms(SmilesError):
    """The molecule exceeds the configured atom limit."""


class SchemaOverflow(InputError):
    """An atom attribute does not fit the feature schema."""


class EmptyCorpus(InputError):
    """Vocabulary construction was given no molecules."""


class EmptyDataset(InputError):
    """Batching or training was given no molecules."""


class DatasetFormatError(InputError):
    """A dataset CSV row could not be read."""

    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(InputError):
    """Invalid model, training or CLI configuration."""


class ArtifactFormatError(InputError):
    """A produced or supplied artifact does not match its schema."""


# Vocabulary mismatch (exit 3)


class VocabMismatch(AmctError):
    """A checkpoint was built against a different motif vocabulary."""

    exit_code = 3


# Divergence (exit 4)


class DivergedLoss(AmctError):
    """The training loss became non-finite."""

    exit_code = 4


# Numerical and programming errors (exit 1)


class TensorError(AmctError):
    """Base class for tensor core failures."""


class ShapeMismatch(TensorError):
    """Operands have incompatible shapes."""


class NonFinite(TensorError):
    """An operation produced NaN or Inf."""


class MaskAllFalse(TensorError):
    """A masked softmax row has no unmasked entry."""


class NotScalar(TensorError):
    """backward() was called on a non-scalar tensor."""


class TapeConsumed(TensorError):
    """backward() was called through an already-consumed graph."""


class IndexOutOfRange(TensorError):
    """An embedding index falls outside its table."""


class NoLabels(AmctError):
    """A supervised loss received no present labels."""


class EmptyBatch(AmctError):
    """A contrastive loss received no motif rows."""


class SingleClass(AmctError):
    """Every task has a single label class, so AUC is undefined."""
