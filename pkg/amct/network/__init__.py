"""
Network layers, the AMCT model, its losses and the optimizer.
"""

from .amct_model import AmctModel, ForwardOutput
from .layers import DecoderLayer, Encoder, EncoderLayer, FeedForward, LayerNorm, Linear, MultiHeadAttention
from .losses import (
    LossReport,
    align_loss,
    motif_contrastive_loss,
    select_contrast_rows,
    supervised_loss,
    total_loss,
    zero_loss,
)
from .module import Module, ModuleList
from .optim import Adam, clip_grad_norm

__all__ = [
    "AmctModel", "ForwardOutput",
    "DecoderLayer", "Encoder", "EncoderLayer", "FeedForward", "LayerNorm", "Linear", "MultiHeadAttention",
    "LossReport", "align_loss", "motif_contrastive_loss", "select_contrast_rows", "supervised_loss",
    "total_loss", "zero_loss",
    "Module", "ModuleList",
    "Adam", "clip_grad_norm",
]
